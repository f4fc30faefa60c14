// Page entry point; kept separate from startApp so tests can bootstrap
// the app themselves without a module-load side effect.

import { startApp } from "./app.js";

window.zonemapEditor = startApp();
