/**
 * One-file in-page entry: capture the current page and download the
 * snapshot JSON. Bundled by `npm run build` into dist/bookmarklet.js;
 * paste it into a devtools console, wrap it as a javascript: bookmarklet,
 * or load it as a content script.
 */

import { capturePage } from "./capture";

function download(name: string, text: string): void {
  const blob = new Blob([text], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = name;
  a.style.display = "none";
  document.body.appendChild(a);
  a.click();
  a.remove();
  URL.revokeObjectURL(url);
}

(() => {
  try {
    const snapshot = capturePage(window);
    const host = location.hostname.replace(/[^a-z0-9.-]/gi, "_") || "page";
    download(`snapshot-${host}.json`, snapshot);
    // keep a handle for programmatic use too
    (window as unknown as Record<string, unknown>).__adwarSnapshot = snapshot;
  } catch (err) {
    console.error("adwar capture failed:", err);
  }
})();
