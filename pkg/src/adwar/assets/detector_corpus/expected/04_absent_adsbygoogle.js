var adsOk = true;
if (false) {
  adsOk = false;
}
function shouldNag() { return !adsOk; }
