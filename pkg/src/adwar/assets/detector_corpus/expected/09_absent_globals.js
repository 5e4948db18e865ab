function hasDoubleclickGlobal() {return true;}
function hasMoat() {return true;}
if (!hasDoubleclickGlobal() && !hasMoat()) {
  showAdblockNotice();
}
