var t0 = performance.now();
var s = document.createElement('script');
s.src = 'https://pagead2.googlesyndication.com/pagead/js/adsbygoogle.js';
s.onerror = function () { window.__abSignal = true; };
s.onload = function () { window.__abSignal = false; };
document.head.appendChild(s);
setTimeout(function checkTiming() {
  var dt = performance.now() - t0;
  if (false) {
    reportBlocking(dt);
  }
}, 250);
