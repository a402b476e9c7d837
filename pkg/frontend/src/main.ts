/** Browser entry point: boots the app against the same-origin API and keeps
 * the exploration state synchronized with the address bar. */

import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const api = new ApiClient((window as { ATLAS_API_BASE?: string }).ATLAS_API_BASE ?? "");
  const app = await createApp(root, api, window.location.search, (query) => {
    const url = query ? `?${query}` : window.location.pathname;
    window.history.replaceState(null, "", url);
  });
  window.addEventListener("popstate", () => {
    void app.applyQuery(window.location.search);
  });
}

void boot();
