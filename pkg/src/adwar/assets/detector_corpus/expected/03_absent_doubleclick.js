function detectBlocker(cb) {}
detectBlocker(function (blocked) {
  if (blocked) { location.href = '/whitelist-us'; }
});
