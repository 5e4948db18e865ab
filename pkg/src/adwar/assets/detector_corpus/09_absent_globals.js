function hasDoubleclickGlobal() {
  return typeof window.DoubleClick !== 'undefined';
}
function hasMoat() {
  return !!window.moatads;
}
if (!hasDoubleclickGlobal() && !hasMoat()) {
  showAdblockNotice();
}
