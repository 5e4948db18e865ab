function probeAdHost(done) {
  var img = new Image();
  var started = Date.now();
  img.onerror = function () { done(Date.now() - started < 20); };
  img.onload = function () { done(false); };
  img.src = 'https://ads.example-metrics.com/pixel.gif?' + started;
}
probeAdHost(function (blocked) {
  if (blocked) { document.body.classList.add('adblock-wall'); }
});
