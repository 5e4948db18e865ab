function adScriptPresent() {
  var probe = document.querySelector('script[src*="googlesyndication"]');
  return probe !== null;
}
if (!adScriptPresent()) {
  document.querySelectorAll('.article-body').forEach(function (el) { el.remove(); });
}
