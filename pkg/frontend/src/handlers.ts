import type { HandlerRegistry } from "./types";

/**
 * Wrapped-listener registry: patches addEventListener on the page's
 * EventTarget prototype so listener registrations made after install are
 * attributable at capture time. Install as early as possible (document
 * start for a content script). Statically discoverable on* attributes are
 * picked up by the capturer independently of this.
 */
export function installHandlerRecording(win: Window & typeof globalThis): HandlerRegistry {
  const recorded = new WeakMap<object, Set<string>>();
  const proto = win.EventTarget.prototype;
  const original = proto.addEventListener;

  function patched(
    this: EventTarget,
    type: string,
    listener: EventListenerOrEventListenerObject | null,
    options?: boolean | AddEventListenerOptions,
  ): void {
    try {
      let kinds = recorded.get(this as object);
      if (!kinds) {
        kinds = new Set();
        recorded.set(this as object, kinds);
      }
      kinds.add(type);
    } catch {
      // recording must never break the page
    }
    return original.call(this, type, listener, options);
  }

  proto.addEventListener = patched as typeof proto.addEventListener;

  return {
    kindsFor(target: unknown): string[] {
      const kinds = recorded.get(target as object);
      return kinds ? [...kinds].sort() : [];
    },
  };
}
