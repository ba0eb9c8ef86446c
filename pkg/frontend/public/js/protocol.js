/**
 * Wire protocol types and codecs for the live-session socket.
 *
 * Every message in either direction is a single JSON text frame with a
 * "type" field.  The shapes here mirror the server exactly; field names
 * are part of the contract, so the encoders below are the only place
 * client messages get built.
 */
export function hello() {
    return { type: "hello" };
}
export function input(tick, move, stance, action) {
    const msg = { type: "input", tick, move, stance };
    if (action) {
        msg.action = action;
    }
    return msg;
}
export function control(cmd, seed) {
    const msg = { type: "control", cmd };
    if (seed !== undefined) {
        msg.seed = seed;
    }
    return msg;
}
export function setOverlay(toggles) {
    return { type: "set_overlay", ...toggles };
}
const SERVER_TYPES = new Set(["meta", "snapshot", "error"]);
/** Decode one server frame; null for anything that is not one. */
export function parseServer(raw) {
    let obj;
    try {
        obj = JSON.parse(raw);
    }
    catch {
        return null;
    }
    if (typeof obj !== "object" || obj === null) {
        return null;
    }
    const type = obj.type;
    if (typeof type !== "string" || !SERVER_TYPES.has(type)) {
        return null;
    }
    return obj;
}
