import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { JSDOM } from "jsdom";
import { describe, expect, it } from "vitest";

import {
  CaptureOptions,
  SnapshotJson,
  capturePage,
  dataAttributeGeometry,
  installHandlerRecording,
} from "../src/index";

const HERE = dirname(fileURLToPath(import.meta.url));
const TESTPAGE = readFileSync(join(HERE, "..", "testpage", "feed.html"), "utf-8");

function loadPage(html: string = TESTPAGE): Window & typeof globalThis {
  const dom = new JSDOM(html, {
    url: "https://social.example/feed",
    runScripts: "dangerously",
  });
  return dom.window as unknown as Window & typeof globalThis;
}

function capture(win: Window & typeof globalThis, opts: CaptureOptions = {}): SnapshotJson {
  return JSON.parse(
    capturePage(win, { geometry: dataAttributeGeometry, ...opts }),
  ) as SnapshotJson;
}

function nodeById(snap: SnapshotJson, domId: string) {
  const node = snap.frames[0].nodes.find((n) => n.attrs["id"] === domId);
  if (!node) throw new Error(`no node with id=${domId}`);
  return node;
}

describe("capturePage", () => {
  it("emits format version 1 with the page url and viewport", () => {
    const snap = capture(loadPage());
    expect(snap.format_version).toBe(1);
    expect(snap.url).toBe("https://social.example/feed");
    expect(snap.viewport.w).toBeGreaterThan(0);
    expect(snap.viewport.h).toBeGreaterThan(0);
  });

  it("serializes the tree with unique ids and consistent child links", () => {
    const snap = capture(loadPage());
    const nodes = snap.frames[0].nodes;
    const ids = nodes.map((n) => n.id);
    expect(new Set(ids).size).toBe(ids.length);
    const known = new Set(ids);
    const referenced = new Set<number>();
    for (const node of nodes) {
      for (const child of node.children) {
        expect(known.has(child)).toBe(true);
        expect(referenced.has(child)).toBe(false); // single parent
        referenced.add(child);
      }
    }
    const roots = ids.filter((id) => !referenced.has(id));
    expect(roots).toHaveLength(1);
    expect(nodes.find((n) => n.id === roots[0])?.tag).toBe("html");
  });

  it("captures rendered geometry from the provider", () => {
    const snap = capture(loadPage());
    const promo = nodeById(snap, "promo-1");
    expect(promo.layout).toEqual({ x: 250, y: 60, w: 500, h: 200, visible: true });
  });

  it("captures the computed-style subset the engine needs", () => {
    const snap = capture(loadPage());
    const promo = nodeById(snap, "promo-1");
    expect(promo.style["border-left-width"]).toBe("1px");
    expect(promo.style["border-right-width"]).toBe("1px");
    expect(promo.style["background-color"]).toMatch(/rgb|#fff/i);
  });

  it("records text content but skips script bodies", () => {
    const snap = capture(loadPage());
    const texts = snap.frames[0].nodes
      .filter((n) => n.tag === "#text")
      .map((n) => n.text);
    expect(texts).toContain("Sponsored");
    expect(texts.join(" ")).not.toContain("toggleMenu");
  });

  it("records static on* attributes and wrapped listeners as handler kinds", () => {
    const dom = new JSDOM("<html><body></body></html>", {
      url: "https://social.example/feed",
      runScripts: "dangerously",
    });
    const win = dom.window as unknown as Window & typeof globalThis;
    const registry = installHandlerRecording(win);
    win.document.body.innerHTML = TESTPAGE.replace(/^[\s\S]*?<body[^>]*>/, "").replace(
      /<\/body>[\s\S]*$/,
      "",
    );
    const post = win.document.getElementById("post-2")!;
    post.addEventListener("mouseover", () => {});
    const snap = capture(win, { handlerRegistry: registry });
    expect(nodeById(snap, "menu").handlers).toContain("click");
    expect(nodeById(snap, "post-2").handlers).toContain("mouseover");
  });

  it("falls back to geometry-only records when rasterization fails", () => {
    // jsdom has no canvas implementation: exactly the tainted-canvas path
    const snap = capture(loadPage());
    const hero = nodeById(snap, "hero");
    expect(hero.image_ref).toBeNull();
    expect(hero.layout.w).toBe(500);
    expect(snap.images).toEqual({});
  });

  it("records cross-origin frames as opaque geometry-only frames", () => {
    const win = loadPage();
    const iframe = win.document.createElement("iframe");
    iframe.src = "https://ads.thirdparty.example/slot";
    iframe.setAttribute("data-cap-x", "700");
    iframe.setAttribute("data-cap-y", "40");
    iframe.setAttribute("data-cap-w", "300");
    iframe.setAttribute("data-cap-h", "250");
    win.document.body.appendChild(iframe);
    Object.defineProperty(iframe, "contentDocument", {
      get() {
        throw new win.DOMException("cross-origin", "SecurityError");
      },
    });
    const snap = capture(win);
    expect(snap.frames).toHaveLength(2);
    const frame = snap.frames[1];
    expect(frame.url).toBe("https://ads.thirdparty.example/slot");
    expect(frame.nodes).toHaveLength(1); // placeholder root only
    expect(frame.nodes[0].attrs["data-capture-opaque"]).toBe("1");
    expect(frame.nodes[0].layout.w).toBe(300);
  });

  it("can skip cross-origin frames when asked", () => {
    const win = loadPage();
    const iframe = win.document.createElement("iframe");
    iframe.src = "https://ads.thirdparty.example/slot";
    Object.defineProperty(iframe, "contentDocument", {
      get() {
        throw new win.DOMException("cross-origin", "SecurityError");
      },
    });
    win.document.body.appendChild(iframe);
    const snap = capture(win, { includeCrossOriginFrames: false });
    expect(snap.frames).toHaveLength(1);
  });

  it("captures scripts and the request log", () => {
    const snap = capture(loadPage());
    expect(snap.scripts.length).toBeGreaterThan(0);
    expect(snap.scripts[0].source).toBe("inline");
    expect(snap.scripts[0].text).toContain("toggleMenu");
    expect(snap.requests[0]).toEqual({
      url: "https://social.example/feed",
      frame: 0,
      kind: "document",
    });
  });

  it("two captures of a static page are structurally equal", () => {
    const win = loadPage();
    const a = capturePage(win, { geometry: dataAttributeGeometry });
    const b = capturePage(win, { geometry: dataAttributeGeometry });
    expect(JSON.parse(a)).toEqual(JSON.parse(b));
  });

  it("continues past per-node serialization failures", () => {
    const win = loadPage();
    const menu = win.document.getElementById("menu")!;
    Object.defineProperty(menu, "getAttributeNames", {
      value: () => {
        throw new Error("hostile accessor");
      },
    });
    const snap = capture(win);
    const placeholder = snap.frames[0].nodes.find(
      (n) => n.attrs["data-capture-error"],
    );
    expect(placeholder).toBeDefined();
    expect(nodeById(snap, "promo-1")).toBeDefined(); // rest captured fine
  });

  it("rejects a style allowlist that drops required properties", () => {
    const win = loadPage();
    expect(() =>
      capturePage(win, { styleAllowlist: ["display", "color"] }),
    ).toThrow(/styleAllowlist must cover/);
  });
});
