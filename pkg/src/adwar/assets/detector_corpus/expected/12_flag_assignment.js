var adsBlocked = false;
function detectViaBait() {
  var d = document.createElement('div');
  d.className = 'ad-banner';
  document.body.appendChild(d);
  return d.offsetHeight < 1;
}
function detectViaGlobals() {
  return typeof window.adsbygoogle === 'undefined';
}
if (adsBlocked) { paywall(); }
