"""adwar: an ad-blocking arms-race toolkit.

Implements the three levers a client holds in the ad-blocking arms race as
testable machinery over serialized page snapshots: perceptual ad detection
(disclosure icons, sponsored text, disclosure links), rootkit-style stealth
planning (whitespace overlays plus a DOM-API interception manifest), and
signature-based neutralization of anti-adblock detector scripts — tied
together by an explicit four-state model of the race itself.
"""

__version__ = "0.1.0"
