(function () {
  var bait = document.createElement('div');
  bait.className = 'adsbox ad-banner';
  bait.style.height = '1px';
  document.body.appendChild(bait);
  function abDetected() {
    return bait.offsetHeight === 0;
  }
  window.setTimeout(function () {
    if (abDetected()) {
      showNag('Please disable your ad blocker');
    }
    document.body.removeChild(bait);
  }, 100);
})();
