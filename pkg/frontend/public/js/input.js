/**
 * Keyboard state and its mapping to sim inputs.
 *
 * Movement keys are level-triggered: the tracker records what is held
 * and intent() derives the current move vector and stance from scratch,
 * so key order never matters.  One-shot keys (pause, reset, overlay
 * toggles, single step) come back from keydown() as commands for the
 * caller to turn into control messages.
 *
 * Bindings: WASD or arrows move, Shift sprints while held, C toggles
 * sneak, Space pauses, R resets, 1-4 flip overlays, period steps one
 * tick while paused.
 */
const NORTH = new Set(["KeyW", "ArrowUp"]);
const SOUTH = new Set(["KeyS", "ArrowDown"]);
const WEST = new Set(["KeyA", "ArrowLeft"]);
const EAST = new Set(["KeyD", "ArrowRight"]);
const SPRINT = new Set(["ShiftLeft", "ShiftRight"]);
const OVERLAY_KEYS = {
    Digit1: "cones",
    Digit2: "posts",
    Digit3: "canvass",
    Digit4: "follow",
};
const ONE_SHOT = {
    Space: { kind: "pause_toggle" },
    KeyR: { kind: "reset" },
    Period: { kind: "step" },
};
export class KeyTracker {
    constructor() {
        this.pressed = new Set();
        this.sneakOn = false;
    }
    /** Track a keydown; returns a command for one-shot keys. */
    keydown(code, repeat = false) {
        this.pressed.add(code);
        if (repeat) {
            return null;
        }
        if (code === "KeyC") {
            this.sneakOn = !this.sneakOn;
            return null;
        }
        const overlay = OVERLAY_KEYS[code];
        if (overlay) {
            return { kind: "overlay", key: overlay };
        }
        return ONE_SHOT[code] ?? null;
    }
    keyup(code) {
        this.pressed.delete(code);
    }
    /** Drop all held keys, e.g. when the window loses focus. */
    release() {
        this.pressed.clear();
    }
    /** Whether the key is one this tracker consumes. */
    handles(code) {
        return (NORTH.has(code) ||
            SOUTH.has(code) ||
            WEST.has(code) ||
            EAST.has(code) ||
            SPRINT.has(code) ||
            code === "KeyC" ||
            code in OVERLAY_KEYS ||
            code in ONE_SHOT);
    }
    axis(pos, neg) {
        let v = 0;
        for (const code of this.pressed) {
            if (pos.has(code)) {
                v = 1;
                break;
            }
        }
        for (const code of this.pressed) {
            if (neg.has(code)) {
                v -= 1;
                break;
            }
        }
        return v;
    }
    /** Current move vector (unit length at most) and stance. */
    intent() {
        let dx = this.axis(EAST, WEST);
        let dy = this.axis(NORTH, SOUTH);
        if (dx !== 0 && dy !== 0) {
            dx *= Math.SQRT1_2;
            dy *= Math.SQRT1_2;
        }
        let stance = "walk";
        if (this.sneakOn) {
            stance = "sneak";
        }
        for (const code of this.pressed) {
            if (SPRINT.has(code)) {
                stance = "sprint";
                break;
            }
        }
        return { move: [dx, dy], stance };
    }
}
