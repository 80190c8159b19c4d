// Browser entry point: binds the app to the real page, the real socket,
// and the serving process. Tests import app.ts directly and inject their
// own document, socket, and scenario instead.
//
// When the page is not served by the session process itself, point it at
// one with ?server=host:port.

import { startApp } from "./app.js";

const server = new URLSearchParams(location.search).get("server") ?? location.host;
const base = `${location.protocol === "https:" ? "https" : "http"}://${server}`;

void startApp({
  doc: document,
  server,
  makeSocket: (url) => new WebSocket(url),
  fetchScenario: () =>
    fetch(`${base}/scenario`).then((r) => r.json() as Promise<Record<string, unknown>>),
});
