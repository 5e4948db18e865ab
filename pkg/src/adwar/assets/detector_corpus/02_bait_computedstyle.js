var testAd = document.createElement('div');
testAd.className = 'textads banner-ads pub_300x250';
document.body.appendChild(testAd);
function adsBlocked() {
  var style = window.getComputedStyle(testAd);
  return style.display === 'none' || testAd.clientHeight === 0;
}
if (adsBlocked()) {
  document.getElementById('content').innerHTML = '';
}
