function detectBlocker(cb) {
  if (typeof window.doubleclick === 'undefined' && !window.googletag) {
    cb(true);
    return;
  }
  cb(false);
}
detectBlocker(function (blocked) {
  if (blocked) { location.href = '/whitelist-us'; }
});
