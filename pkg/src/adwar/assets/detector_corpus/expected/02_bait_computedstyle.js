var testAd = document.createElement('div');
testAd.className = 'textads banner-ads pub_300x250';
document.body.appendChild(testAd);
function adsBlocked() {return false;}
if (adsBlocked()) {
  document.getElementById('content').innerHTML = '';
}
