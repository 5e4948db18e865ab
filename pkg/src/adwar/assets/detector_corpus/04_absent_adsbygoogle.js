var adsOk = true;
if (typeof adsbygoogle === 'undefined' || adsbygoogle.loaded !== true) {
  adsOk = false;
}
function shouldNag() { return !adsOk; }
