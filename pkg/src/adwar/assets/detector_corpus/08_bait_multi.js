var baits = ['ad_unit', 'adbadge', 'banner_ad'];
var hits = 0;
baits.forEach(function (cls) {
  var el = document.createElement('span');
  el.className = cls;
  document.body.appendChild(el);
  if (el.offsetWidth === 0 || el.offsetHeight === 0) { hits += 1; }
});
function baitTripped() {
  return hits > 0;
}
