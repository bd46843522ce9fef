export * from "./protocol.js";
export * from "./client.js";
export * from "./panel.js";
export * from "./canvas.js";
export * from "./colors.js";
