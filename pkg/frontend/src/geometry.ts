import type { GeometryProvider, Rect } from "./types";

/**
 * Default geometry: final rendered boxes relative to the document origin
 * (client rect plus scroll offset), visibility from layout + computed
 * style. Returns null for detached elements.
 */
export function defaultGeometry(win: Window & typeof globalThis): GeometryProvider {
  return (el: Element): Rect | null => {
    const rect = el.getBoundingClientRect();
    let visible = rect.width > 0 && rect.height > 0;
    try {
      const cs = win.getComputedStyle(el);
      if (cs.getPropertyValue("display") === "none") visible = false;
      if (cs.getPropertyValue("visibility") === "hidden") visible = false;
    } catch {
      // computed style unavailable: keep the layout-based verdict
    }
    return {
      x: rect.left + win.scrollX,
      y: rect.top + win.scrollY,
      w: rect.width,
      h: rect.height,
      visible,
    };
  };
}

/**
 * Geometry from data-cap-* annotations (data-cap-x/y/w/h, optional
 * data-cap-visible="0"). Layout-less DOM environments (jsdom) report
 * zero-sized client rects, so annotated test pages carry their rendered
 * geometry explicitly and tests pass this provider to capturePage.
 */
export const dataAttributeGeometry: GeometryProvider = (el) => {
  const x = el.getAttribute("data-cap-x");
  const y = el.getAttribute("data-cap-y");
  const w = el.getAttribute("data-cap-w");
  const h = el.getAttribute("data-cap-h");
  if (x === null || y === null || w === null || h === null) return null;
  return {
    x: Number(x),
    y: Number(y),
    w: Number(w),
    h: Number(h),
    visible: el.getAttribute("data-cap-visible") !== "0",
  };
};
