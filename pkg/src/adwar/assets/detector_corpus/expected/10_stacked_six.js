var b1 = document.createElement('div');
b1.className = 'adsbox';
document.body.appendChild(b1);
var b2 = document.createElement('div');
b2.className = 'pub_300x250 textads';
document.body.appendChild(b2);
var g1 = typeof window.googletag === 'undefined';
var g2 = !document.querySelector('script[src*="doubleclick"]');
var t0 = performance.now();
var img = new Image();
img.onerror = function () { window.__blocked6 = true; };
img.src = 'https://pagead2.example-cdn.com/pixel.gif';
function anyBlockerSignal() {return false;}
setTimeout(function () { if (anyBlockerSignal()) { lockContent(); } }, 300);
