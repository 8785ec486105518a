import { createApp } from "./app.js";
import { createHttpApi } from "./api.js";

const root = document.getElementById("app");
if (root) {
  void createApp(root, createHttpApi()).start();
}
