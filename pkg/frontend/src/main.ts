import { ApiClient } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("api") ?? "http://127.0.0.1:8765");

const root = document.getElementById("app")!;
const form = document.getElementById("session-form") as HTMLFormElement;
const briefInput = document.getElementById("brief-text") as HTMLTextAreaElement;
const draftInput = document.getElementById("draft-json") as HTMLTextAreaElement;

const app = new App(root, api);

form.addEventListener("submit", (ev) => {
  ev.preventDefault();
  void app.startSession("web-brief", briefInput.value, draftInput.value).then(() => {
    form.style.display = "none";
  });
});

const existing = params.get("session");
if (existing) {
  form.style.display = "none";
  app.resume(existing);
}
