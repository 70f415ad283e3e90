// Single-page chat UI over the dmnbot session API.
//
// One message is in flight at a time: the composer is disabled while a reply
// is pending, so the rendered transcript always matches the server's order.

import { ApiError, type BotResponse, type ChatApi } from "./api.js";

export interface ChatController {
  send(text: string): Promise<void>;
  retryLast(): Promise<void>;
  startNewSession(): Promise<void>;
  readonly sessionId: string | null;
}

interface Elements {
  transcript: HTMLUListElement;
  input: HTMLInputElement;
  send: HTMLButtonElement;
  help: HTMLButtonElement;
  badge: HTMLSpanElement;
  banner: HTMLDivElement;
  bannerText: HTMLSpanElement;
  bannerAction: HTMLButtonElement;
  form: HTMLFormElement;
}

function renderSkeleton(root: HTMLElement): Elements {
  root.innerHTML = `
    <div class="chat">
      <header class="chat-header">
        <span class="chat-title">Decision assistant</span>
        <span id="decision-badge" class="decision-badge" hidden></span>
      </header>
      <div id="banner" class="banner" hidden>
        <span id="banner-text"></span>
        <button id="banner-action" type="button"></button>
      </div>
      <ul id="transcript" class="transcript" aria-live="polite"></ul>
      <form id="composer" class="composer">
        <input id="message" autocomplete="off" placeholder="Type a message" aria-label="Message" />
        <button id="send" type="submit" disabled>Send</button>
        <button id="help" type="button" title="Ask the bot for help">Help</button>
      </form>
    </div>`;
  return {
    transcript: root.querySelector("#transcript") as HTMLUListElement,
    input: root.querySelector("#message") as HTMLInputElement,
    send: root.querySelector("#send") as HTMLButtonElement,
    help: root.querySelector("#help") as HTMLButtonElement,
    badge: root.querySelector("#decision-badge") as HTMLSpanElement,
    banner: root.querySelector("#banner") as HTMLDivElement,
    bannerText: root.querySelector("#banner-text") as HTMLSpanElement,
    bannerAction: root.querySelector("#banner-action") as HTMLButtonElement,
    form: root.querySelector("#composer") as HTMLFormElement,
  };
}

export async function initChat(root: HTMLElement, api: ChatApi): Promise<ChatController> {
  const el = renderSkeleton(root);
  let sessionId: string | null = null;
  let busy = false;
  let closed = false;
  let pendingText: string | null = null; // last text that failed to send

  function append(speaker: "user" | "bot" | "system", text: string): void {
    const item = document.createElement("li");
    item.className = `msg msg-${speaker}`;
    item.textContent = text;
    el.transcript.appendChild(item);
  }

  function refreshComposer(): void {
    const usable = !busy && !closed && sessionId !== null;
    el.send.disabled = !usable || el.input.value.trim() === "";
    el.help.disabled = !usable;
    el.input.disabled = closed;
  }

  function showBanner(text: string, action: string, handler: () => void): void {
    el.bannerText.textContent = text;
    el.bannerAction.textContent = action;
    el.bannerAction.onclick = () => {
      hideBanner();
      handler();
    };
    el.banner.hidden = false;
  }

  function hideBanner(): void {
    el.banner.hidden = true;
  }

  function applyResponse(response: BotResponse): void {
    for (const reply of response.replies) {
      append("bot", reply);
    }
    if (response.decision !== null) {
      el.badge.textContent = response.decision;
      el.badge.hidden = false;
    }
    if (response.status === "closed") {
      closed = true;
    }
  }

  async function openSession(): Promise<void> {
    try {
      const started = await api.createSession();
      sessionId = started.sessionId;
      closed = false;
      el.badge.hidden = true;
      el.transcript.replaceChildren();
      append("bot", started.greeting);
      hideBanner();
    } catch (err) {
      showBanner("Cannot reach the server.", "Retry", () => void openSession());
    }
    refreshComposer();
  }

  async function deliver(text: string, alreadyRendered: boolean): Promise<void> {
    if (busy || closed || sessionId === null) return;
    const trimmed = text.trim();
    if (!trimmed) return;
    busy = true;
    refreshComposer();
    if (!alreadyRendered) append("user", trimmed);
    try {
      const response = await api.sendMessage(sessionId, trimmed);
      pendingText = null;
      applyResponse(response);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        showBanner("Session expired.", "Start new", () => void openSession());
      } else if (err instanceof ApiError && err.status === 409) {
        closed = true;
        append("system", "This conversation has ended. Start a new session to continue.");
      } else if (err instanceof ApiError && err.status > 0) {
        append("system", `The server rejected the message (${err.status}): ${err.message}`);
      } else {
        // transient network failure: keep the transcript, offer a retry
        pendingText = trimmed;
        showBanner("Network problem, the message was not delivered.", "Retry", () => {
          void deliver(trimmed, true);
        });
      }
    } finally {
      busy = false;
      refreshComposer();
    }
  }

  el.input.addEventListener("input", refreshComposer);
  el.form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = el.input.value;
    el.input.value = "";
    refreshComposer();
    void deliver(text, false);
  });
  el.help.addEventListener("click", () => {
    void deliver("help", false);
  });

  await openSession();

  return {
    send: (text: string) => deliver(text, false),
    retryLast: () => (pendingText ? deliver(pendingText, true) : Promise.resolve()),
    startNewSession: () => openSession(),
    get sessionId() {
      return sessionId;
    },
  };
}
