import { bootstrap } from "./main.js";

const root = document.getElementById("app");
if (root) {
  void bootstrap(root);
}
