import { ChatApi } from "./api.js";
import { initChat } from "./app.js";

// served under /ui from the same origin as the API; an explicit base URL can
// be injected for development against a remote server
const base = (window as { DMNBOT_BASE?: string }).DMNBOT_BASE ?? "";

const root = document.getElementById("root");
if (root) {
  void initChat(root, new ChatApi(base));
}
