function adScriptPresent() {return true;}
if (!adScriptPresent()) {
  document.querySelectorAll('.article-body').forEach(function (el) { el.remove(); });
}
