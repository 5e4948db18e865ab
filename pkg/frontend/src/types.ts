/**
 * Snapshot file format (version 1) emitted by the capture harness and
 * consumed by the adwar engine's parser. Field names and shapes are the
 * cross-language contract; see the engine's README for the format notes.
 */

export const FORMAT_VERSION = 1;

export interface LayoutJson {
  x: number;
  y: number;
  w: number;
  h: number;
  visible: boolean;
}

export interface NodeJson {
  id: number;
  tag: string;
  attrs: Record<string, string>;
  text: string;
  children: number[];
  layout: LayoutJson;
  style: Record<string, string>;
  image_ref: string | null;
  handlers: string[];
}

export interface FrameJson {
  url: string;
  nodes: NodeJson[];
  is_ad_iframe?: boolean;
}

export interface ImageJson {
  w: number;
  h: number;
  rgba_base64: string;
}

export interface ScriptJson {
  id: string;
  source: string;
  text: string;
}

export interface RequestJson {
  url: string;
  frame: number;
  kind: string;
}

export interface SnapshotJson {
  format_version: number;
  url: string;
  viewport: { w: number; h: number };
  frames: FrameJson[];
  images: Record<string, ImageJson>;
  scripts: ScriptJson[];
  requests: RequestJson[];
}

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
  visible: boolean;
}

/** Returns final rendered geometry for an element, or null to fall back. */
export type GeometryProvider = (el: Element) => Rect | null;

/**
 * The engine's typed computed-style subset. A custom style allowlist must
 * cover these or the snapshot loses the properties detection relies on.
 */
export const REQUIRED_STYLE_PROPS = [
  "display",
  "visibility",
  "position",
  "background-color",
  "color",
  "border-left-width",
  "border-right-width",
  "z-index",
] as const;

export interface CaptureOptions {
  /** Longest image side kept when rasterizing; larger images are scaled. */
  maxImageDimension?: number;
  /** Attempt to capture cross-origin frames (geometry-only on failure). */
  includeCrossOriginFrames?: boolean;
  /** Computed-style properties to record; must cover REQUIRED_STYLE_PROPS. */
  styleAllowlist?: string[];
  /** Record event-handler kinds (static on* attributes + the registry). */
  recordHandlers?: boolean;
  /**
   * Rendered-geometry source. Defaults to getBoundingClientRect plus the
   * scroll offset; environments without layout (jsdom) can supply one,
   * e.g. dataAttributeGeometry for annotated test pages.
   */
  geometry?: GeometryProvider;
  /** Listener registry from installHandlerRecording(), if in use. */
  handlerRegistry?: HandlerRegistry;
}

export interface HandlerRegistry {
  kindsFor(target: unknown): string[];
}
