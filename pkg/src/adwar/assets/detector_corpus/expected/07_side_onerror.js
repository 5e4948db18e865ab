function probeAdHost(done) {}
probeAdHost(function (blocked) {
  if (blocked) { document.body.classList.add('adblock-wall'); }
});
