import { dataAttributeGeometry, defaultGeometry } from "./geometry";
import {
  CaptureOptions,
  FORMAT_VERSION,
  FrameJson,
  GeometryProvider,
  ImageJson,
  NodeJson,
  Rect,
  REQUIRED_STYLE_PROPS,
  RequestJson,
  ScriptJson,
  SnapshotJson,
} from "./types";

export { dataAttributeGeometry, defaultGeometry };
export { installHandlerRecording } from "./handlers";
export * from "./types";

const DEFAULTS = {
  maxImageDimension: 1024,
  includeCrossOriginFrames: true,
  recordHandlers: true,
};

interface Resolved {
  maxImageDimension: number;
  includeCrossOriginFrames: boolean;
  styleAllowlist: string[];
  recordHandlers: boolean;
  geometry: GeometryProvider;
  handlerRegistry: CaptureOptions["handlerRegistry"];
}

function resolveOptions(win: Window & typeof globalThis, opts: CaptureOptions): Resolved {
  const allowlist = opts.styleAllowlist ?? [...REQUIRED_STYLE_PROPS];
  for (const prop of REQUIRED_STYLE_PROPS) {
    if (!allowlist.includes(prop)) {
      throw new Error(`styleAllowlist must cover ${prop}`);
    }
  }
  return {
    maxImageDimension: opts.maxImageDimension ?? DEFAULTS.maxImageDimension,
    includeCrossOriginFrames:
      opts.includeCrossOriginFrames ?? DEFAULTS.includeCrossOriginFrames,
    styleAllowlist: allowlist,
    recordHandlers: opts.recordHandlers ?? DEFAULTS.recordHandlers,
    geometry: opts.geometry ?? defaultGeometry(win),
    handlerRegistry: opts.handlerRegistry,
  };
}

// ---------------------------------------------------------------------------
// style sanitation: the engine's parser validates the typed properties, so
// only emit values it can interpret; anything else is dropped (colors in
// exotic spaces, z-index "auto", percentage border widths).

const COLOR_KEYWORDS = new Set([
  "white", "black", "red", "green", "blue", "yellow", "orange",
  "gray", "grey", "silver", "transparent",
]);

function safeStyleValue(prop: string, value: string): string | null {
  const v = value.trim();
  if (!v) return null;
  if (prop === "background-color" || prop === "color") {
    if (v.startsWith("#") || /^rgba?\(/.test(v) || COLOR_KEYWORDS.has(v.toLowerCase())) {
      return v;
    }
    return null;
  }
  if (prop === "border-left-width" || prop === "border-right-width") {
    return /^-?\d+(\.\d+)?(px)?$/.test(v) ? v : null;
  }
  if (prop === "z-index") {
    return /^-?\d+$/.test(v) ? v : null;
  }
  return v;
}

// ---------------------------------------------------------------------------
// image rasterization

const B64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

function bytesToBase64(bytes: Uint8ClampedArray): string {
  // self-contained so the bundle has no environment assumptions
  const out: string[] = [];
  for (let i = 0; i < bytes.length; i += 3) {
    const b0 = bytes[i];
    const b1 = i + 1 < bytes.length ? bytes[i + 1] : 0;
    const b2 = i + 2 < bytes.length ? bytes[i + 2] : 0;
    out.push(
      B64[b0 >> 2],
      B64[((b0 & 3) << 4) | (b1 >> 4)],
      i + 1 < bytes.length ? B64[((b1 & 15) << 2) | (b2 >> 6)] : "=",
      i + 2 < bytes.length ? B64[b2 & 63] : "=",
    );
  }
  return out.join("");
}

function rasterizeImage(
  doc: Document,
  img: HTMLImageElement,
  maxDim: number,
): ImageJson | null {
  try {
    const nw = img.naturalWidth;
    const nh = img.naturalHeight;
    if (!nw || !nh) return null;
    const scale = Math.min(1, maxDim / Math.max(nw, nh));
    const w = Math.max(1, Math.round(nw * scale));
    const h = Math.max(1, Math.round(nh * scale));
    const canvas = doc.createElement("canvas");
    canvas.width = w;
    canvas.height = h;
    const ctx = canvas.getContext("2d");
    if (!ctx) return null;
    ctx.drawImage(img, 0, 0, w, h);
    // throws on tainted canvases: caller falls back to geometry-only
    const data = ctx.getImageData(0, 0, w, h).data;
    return { w, h, rgba_base64: bytesToBase64(data) };
  } catch {
    return null;
  }
}

// ---------------------------------------------------------------------------
// node serialization

const SKIP_TEXT_PARENTS = new Set(["script", "style", "noscript"]);

class FrameSerializer {
  private nextId = 1;
  readonly nodes: NodeJson[] = [];

  constructor(
    private readonly win: Window & typeof globalThis,
    private readonly opts: Resolved,
    private readonly images: Record<string, ImageJson>,
    private readonly imageIds: Map<HTMLImageElement, string | null>,
  ) {}

  serialize(root: Element): void {
    this.walkElement(root);
  }

  private allocId(): number {
    return this.nextId++;
  }

  private zeroLayout(): Rect {
    return { x: 0, y: 0, w: 0, h: 0, visible: true };
  }

  private walkElement(el: Element): number {
    const id = this.allocId();
    const placeholder: NodeJson = {
      id,
      tag: "div",
      attrs: {},
      text: "",
      children: [],
      layout: { ...this.zeroLayout() },
      style: {},
      image_ref: null,
      handlers: [],
    };
    // reserve our slot so children can be appended after it in order
    const index = this.nodes.length;
    this.nodes.push(placeholder);
    try {
      this.nodes[index] = this.serializeElement(el, id);
    } catch (err) {
      // per-node failures must not abort the capture
      placeholder.attrs["data-capture-error"] = String(err);
    }
    return id;
  }

  private serializeElement(el: Element, id: number): NodeJson {
    const attrs: Record<string, string> = {};
    for (const name of el.getAttributeNames()) {
      const value = el.getAttribute(name);
      if (value !== null) attrs[name] = value;
    }

    const handlers = new Set<string>();
    if (this.opts.recordHandlers) {
      for (const name of el.getAttributeNames()) {
        if (name.startsWith("on") && name.length > 2) handlers.add(name.slice(2));
      }
      if (this.opts.handlerRegistry) {
        for (const kind of this.opts.handlerRegistry.kindsFor(el)) handlers.add(kind);
      }
    }

    const style: Record<string, string> = {};
    try {
      const computed = this.win.getComputedStyle(el);
      for (const prop of this.opts.styleAllowlist) {
        const raw =
          computed.getPropertyValue(prop) ||
          (el instanceof this.win.HTMLElement
            ? el.style.getPropertyValue(prop)
            : "");
        const safe = safeStyleValue(prop, raw);
        if (safe !== null) style[prop] = safe;
      }
    } catch {
      // style capture is best effort
    }

    let imageRef: string | null = null;
    if (el instanceof this.win.HTMLImageElement) {
      if (!this.imageIds.has(el)) {
        const raster = rasterizeImage(el.ownerDocument, el, this.opts.maxImageDimension);
        if (raster) {
          const ref = `img${this.imageIds.size}`;
          this.images[ref] = raster;
          this.imageIds.set(el, ref);
        } else {
          this.imageIds.set(el, null); // tainted/undecodable: geometry only
        }
      }
      imageRef = this.imageIds.get(el) ?? null;
    }

    const children: number[] = [];
    const tag = el.tagName.toLowerCase();
    for (const child of Array.from(el.childNodes)) {
      if (child.nodeType === 1) {
        children.push(this.walkElement(child as Element));
      } else if (child.nodeType === 3 && !SKIP_TEXT_PARENTS.has(tag)) {
        const text = child.textContent ?? "";
        if (text.trim()) children.push(this.addTextNode(child, text));
      }
    }

    const rect = this.opts.geometry(el) ?? this.zeroLayout();
    return {
      id,
      tag,
      attrs,
      text: "",
      children,
      layout: { x: rect.x, y: rect.y, w: rect.w, h: rect.h, visible: rect.visible },
      style,
      image_ref: imageRef,
      handlers: [...handlers].sort(),
    };
  }

  private addTextNode(node: Node, text: string): number {
    const id = this.allocId();
    let rect: Rect = this.zeroLayout();
    try {
      const doc = node.ownerDocument;
      if (doc) {
        const range = doc.createRange();
        range.selectNodeContents(node);
        const r = range.getBoundingClientRect();
        if (r.width || r.height) {
          rect = {
            x: r.left + this.win.scrollX,
            y: r.top + this.win.scrollY,
            w: r.width,
            h: r.height,
            visible: true,
          };
        }
      }
    } catch {
      // rendered extent unavailable; a zero box is still valid
    }
    this.nodes.push({
      id,
      tag: "#text",
      attrs: {},
      text: text.trim(),
      children: [],
      layout: { x: rect.x, y: rect.y, w: rect.w, h: rect.h, visible: rect.visible },
      style: {},
      image_ref: null,
      handlers: [],
    });
    return id;
  }
}

// ---------------------------------------------------------------------------
// frames, scripts, requests

function opaqueFrame(url: string, rect: Rect | null): FrameJson {
  return {
    url,
    nodes: [
      {
        id: 1,
        tag: "html",
        attrs: { "data-capture-opaque": "1" },
        text: "",
        children: [],
        layout: {
          x: 0,
          y: 0,
          w: rect?.w ?? 0,
          h: rect?.h ?? 0,
          visible: rect?.visible ?? true,
        },
        style: {},
        image_ref: null,
        handlers: [],
      },
    ],
  };
}

function captureScripts(doc: Document): ScriptJson[] {
  const out: ScriptJson[] = [];
  const scripts = Array.from(doc.querySelectorAll("script"));
  scripts.forEach((s, i) => {
    const src = s.getAttribute("src");
    out.push({
      id: `s${i}`,
      source: src ? src : "inline",
      text: src ? "" : s.textContent ?? "",
    });
  });
  return out;
}

const INITIATOR_KINDS: Record<string, string> = {
  script: "script",
  img: "image",
  css: "other",
  link: "other",
  fetch: "xhr",
  xmlhttprequest: "xhr",
  iframe: "document",
  navigation: "document",
};

function captureRequests(win: Window & typeof globalThis): RequestJson[] {
  const out: RequestJson[] = [
    { url: win.location.href, frame: 0, kind: "document" },
  ];
  try {
    const entries = win.performance?.getEntriesByType?.("resource") ?? [];
    for (const entry of entries as PerformanceResourceTiming[]) {
      out.push({
        url: entry.name,
        frame: 0,
        kind: INITIATOR_KINDS[entry.initiatorType] ?? "other",
      });
    }
  } catch {
    // resource timing unavailable: the document entry alone is fine
  }
  return out;
}

// ---------------------------------------------------------------------------
// entry point

/**
 * Serialize the page into snapshot-format-v1 bytes (a JSON string).
 *
 * Runs in a page context with DOM access (content script, devtools
 * snippet, bookmarklet). Same-origin iframes are captured as full frames;
 * cross-origin frames become opaque geometry-only frames. Per-node
 * serialization failures are recorded on placeholder nodes and the
 * capture continues.
 */
export function capturePage(
  win: Window & typeof globalThis = window,
  options: CaptureOptions = {},
): string {
  const opts = resolveOptions(win, options);
  const doc = win.document;
  if (!doc?.documentElement) {
    throw new Error("capturePage needs a document with a root element");
  }

  const images: Record<string, ImageJson> = {};
  const imageIds = new Map<HTMLImageElement, string | null>();
  const frames: FrameJson[] = [];

  const top = new FrameSerializer(win, opts, images, imageIds);
  top.serialize(doc.documentElement);
  frames.push({ url: win.location.href, nodes: top.nodes });

  for (const iframe of Array.from(doc.querySelectorAll("iframe"))) {
    const rect = opts.geometry(iframe);
    let childDoc: Document | null = null;
    let childWin: (Window & typeof globalThis) | null = null;
    try {
      childDoc = iframe.contentDocument;
      childWin = iframe.contentWindow as (Window & typeof globalThis) | null;
    } catch {
      childDoc = null; // cross-origin access throws
    }
    if (childDoc?.documentElement && childWin) {
      const sub = new FrameSerializer(childWin, opts, images, imageIds);
      sub.serialize(childDoc.documentElement);
      frames.push({ url: childDoc.location?.href ?? iframe.src, nodes: sub.nodes });
    } else if (opts.includeCrossOriginFrames) {
      frames.push(opaqueFrame(iframe.src, rect));
    }
  }

  const snapshot: SnapshotJson = {
    format_version: FORMAT_VERSION,
    url: win.location.href,
    viewport: { w: win.innerWidth || 1, h: win.innerHeight || 1 },
    frames,
    images,
    scripts: captureScripts(doc),
    requests: captureRequests(win),
  };
  return JSON.stringify(snapshot);
}
