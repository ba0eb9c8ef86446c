/**
 * Client view state: the latest server messages plus local UI flags.
 *
 * The sim is authoritative; the client renders exactly what the latest
 * snapshot says and never extrapolates between ticks.  A fresh meta
 * (hello reply or reset) invalidates whatever snapshot came before it.
 */
export function initialView() {
    return {
        connection: "connecting",
        meta: null,
        snapshot: null,
        toggles: { cones: false, posts: false, canvass: false, follow: false },
        paused: false,
        lastError: null,
    };
}
/** Fold one server message into the view.  Latest snapshot wins. */
export function applyServer(view, msg) {
    switch (msg.type) {
        case "meta":
            view.meta = msg;
            view.snapshot = null;
            view.lastError = null;
            break;
        case "snapshot":
            view.snapshot = msg;
            break;
        case "error":
            view.lastError = msg.message;
            break;
    }
}
/** Flip one overlay toggle and return the new full toggle set. */
export function flipToggle(view, key) {
    view.toggles = { ...view.toggles, [key]: !view.toggles[key] };
    return view.toggles;
}
