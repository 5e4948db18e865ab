!function (w, d) {
  var marker = d.createElement('div');
  marker.className = 'ad-placement';
  d.body.appendChild(marker);
  function blockerSeen() {
    return marker.clientHeight === 0;
  }
  w.__siteGate = { blocked: blockerSeen() };
}(window, document);
