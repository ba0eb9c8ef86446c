/**
 * Bootstrap: wire the canvas, keyboard, and socket together and run
 * the render loop.  All sim truth lives in the ViewState; this file
 * only routes events and repaints.
 */
import { fitCamera, screenToWorld } from "./camera.js";
import { KeyTracker } from "./input.js";
import { Client } from "./net.js";
import { drawFrame } from "./render.js";
import { flipToggle, initialView } from "./state.js";
const canvas = document.getElementById("view");
const ctx = canvas.getContext("2d");
const banner = document.getElementById("banner");
const hud = document.getElementById("hud");
const view = initialView();
const keys = new KeyTracker();
const proto = location.protocol === "https:" ? "wss://" : "ws://";
const client = new Client(proto + location.host + "/ws", view, () => keys.intent());
let cam = fitCamera(1, 1, canvas.width, canvas.height);
function refit() {
    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
    const map = view.meta?.map;
    cam = fitCamera(map?.width ?? 1, map?.height ?? 1, canvas.width, canvas.height);
}
function runCommand(cmd) {
    switch (cmd.kind) {
        case "pause_toggle":
            view.paused = !view.paused;
            client.sendControl(view.paused ? "pause" : "resume");
            break;
        case "step":
            client.sendControl("step");
            break;
        case "reset":
            client.sendControl("reset");
            break;
        case "overlay":
            flipToggle(view, cmd.key);
            client.sendOverlay();
            break;
    }
}
document.addEventListener("keydown", (e) => {
    if (!keys.handles(e.code)) {
        return;
    }
    e.preventDefault();
    const cmd = keys.keydown(e.code, e.repeat);
    if (cmd) {
        runCommand(cmd);
    }
});
document.addEventListener("keyup", (e) => {
    keys.keyup(e.code);
});
window.addEventListener("blur", () => {
    keys.release();
});
window.addEventListener("resize", refit);
canvas.addEventListener("click", (e) => {
    const rect = canvas.getBoundingClientRect();
    const [wx, wy] = screenToWorld(cam, e.clientX - rect.left, e.clientY - rect.top);
    const map = view.meta?.map;
    if (!map || wx < 0 || wy < 0 || wx >= map.width || wy >= map.height) {
        return;
    }
    client.queueAction({ type: "throw_brick", target: [wx, wy] });
});
function hudText() {
    const snap = view.snapshot;
    const parts = [];
    parts.push(snap ? `tick ${snap.tick}` : "waiting for snapshot");
    const player = snap?.agents.find((a) => a.id === 0);
    if (player?.stance) {
        parts.push(player.stance);
    }
    if (view.paused) {
        parts.push("paused");
    }
    const on = Object.entries(view.toggles)
        .filter(([, v]) => v)
        .map(([k]) => k);
    if (on.length > 0) {
        parts.push(`overlays: ${on.join(" ")}`);
    }
    if (view.lastError) {
        parts.push(`error: ${view.lastError}`);
    }
    return parts.join("  |  ");
}
let lastMetaSeen = null;
function frame() {
    requestAnimationFrame(frame);
    if (view.meta !== lastMetaSeen) {
        lastMetaSeen = view.meta;
        refit();
    }
    drawFrame(ctx, view, cam, canvas.width, canvas.height);
    hud.textContent = hudText();
    banner.hidden = view.connection === "open";
    banner.textContent =
        view.connection === "connecting" ? "connecting..." : "connection lost, retrying...";
}
refit();
client.connect();
requestAnimationFrame(frame);
