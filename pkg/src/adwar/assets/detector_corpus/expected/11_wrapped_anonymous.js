!function (w, d) {
  var marker = d.createElement('div');
  marker.className = 'ad-placement';
  d.body.appendChild(marker);
  function blockerSeen() {return false;}
  w.__siteGate = { blocked: blockerSeen() };
}(window, document);
