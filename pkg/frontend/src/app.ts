import { ApiError, createSession, sendMessage } from "./api.js";
import { renderActionBars } from "./bars.js";
import { renderCandidateTable } from "./candidates.js";
import type { DialogueTurn } from "./types.js";

export const SAMPLE_PROFILE = {
  company_id: "acme-crm",
  name: "Acme CRM",
  sales_goals: "expand mid-market subscriptions",
  product_category: "customer relationship management software",
  target_audience: "mid-market sales teams",
  product_keywords: ["pipeline analytics", "lead scoring", "workflow automation"],
};

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

export function initApp(root: HTMLElement): void {
  root.innerHTML = `
    <div id="error-banner" class="banner hidden">
      <span id="error-text"></span>
      <button id="retry-btn" class="hidden" type="button">Retry</button>
    </div>
    <div id="start-panel" class="panel">
      <h2>New session</h2>
      <textarea id="profile-input" rows="8" spellcheck="false"></textarea>
      <button id="start-btn" type="button">Start session</button>
    </div>
    <div class="columns">
      <div id="chat-panel" class="panel hidden">
        <div id="transcript"></div>
        <form id="send-form">
          <input id="message-input" autocomplete="off" placeholder="Type a message" disabled />
          <button id="send-btn" type="submit" disabled>Send</button>
        </form>
      </div>
      <div id="diagnostics" class="panel hidden">
        <h3>Action</h3>
        <div id="action-bars-slot"></div>
        <h3>Candidates</h3>
        <div id="candidates-slot"></div>
      </div>
    </div>
  `;
  const pick = <T extends HTMLElement>(selector: string): T => {
    const el = root.querySelector<T>(selector);
    if (!el) throw new Error(`missing element ${selector}`);
    return el;
  };
  const banner = pick<HTMLDivElement>("#error-banner");
  const errorText = pick<HTMLSpanElement>("#error-text");
  const retryBtn = pick<HTMLButtonElement>("#retry-btn");
  const startPanel = pick<HTMLDivElement>("#start-panel");
  const profileInput = pick<HTMLTextAreaElement>("#profile-input");
  const startBtn = pick<HTMLButtonElement>("#start-btn");
  const chatPanel = pick<HTMLDivElement>("#chat-panel");
  const diagnostics = pick<HTMLDivElement>("#diagnostics");
  const transcriptEl = pick<HTMLDivElement>("#transcript");
  const sendForm = pick<HTMLFormElement>("#send-form");
  const messageInput = pick<HTMLInputElement>("#message-input");
  const sendBtn = pick<HTMLButtonElement>("#send-btn");
  const barsSlot = pick<HTMLDivElement>("#action-bars-slot");
  const candidatesSlot = pick<HTMLDivElement>("#candidates-slot");

  profileInput.value = JSON.stringify(SAMPLE_PROFILE, null, 2);

  let sessionId: string | null = null;
  let pending = false;
  let failedText: string | null = null;
  const transcript: DialogueTurn[] = [];

  function showError(text: string, canRetry: boolean): void {
    errorText.textContent = text;
    banner.classList.remove("hidden");
    retryBtn.classList.toggle("hidden", !canRetry);
  }

  function clearError(): void {
    banner.classList.add("hidden");
    retryBtn.classList.add("hidden");
    errorText.textContent = "";
  }

  function refreshControls(): void {
    messageInput.disabled = pending || sessionId === null;
    sendBtn.disabled =
      pending || sessionId === null || messageInput.value.trim() === "";
  }

  function renderTranscript(): void {
    transcriptEl.replaceChildren(
      ...transcript.map((turn) => {
        const row = document.createElement("div");
        row.className = `turn ${turn.speaker}`;
        const who = document.createElement("span");
        who.className = "turn-speaker";
        who.textContent = turn.speaker;
        const msg = document.createElement("span");
        msg.className = "turn-message";
        msg.textContent = turn.message;
        row.append(who, msg);
        return row;
      }),
    );
    transcriptEl.scrollTop = transcriptEl.scrollHeight;
  }

  async function startSession(): Promise<void> {
    if (pending || sessionId !== null) return;
    let profile: Record<string, unknown>;
    try {
      profile = JSON.parse(profileInput.value);
    } catch {
      showError("profile is not valid JSON", false);
      return;
    }
    pending = true;
    startBtn.disabled = true;
    try {
      const created = await createSession(profile);
      sessionId = created.session_id;
      clearError();
      startPanel.classList.add("hidden");
      chatPanel.classList.remove("hidden");
      diagnostics.classList.remove("hidden");
    } catch (err) {
      showError(describe(err), false);
      startBtn.disabled = false;
    } finally {
      pending = false;
      refreshControls();
    }
  }

  async function deliver(text: string): Promise<void> {
    if (pending || sessionId === null) return;
    const trimmed = text.trim();
    if (trimmed === "") return;
    pending = true;
    refreshControls();
    try {
      const reply = await sendMessage(sessionId, trimmed);
      transcript.push(
        { speaker: "customer", message: trimmed },
        { speaker: "representative", message: reply.response },
      );
      renderTranscript();
      barsSlot.replaceChildren(renderActionBars(reply.action));
      candidatesSlot.replaceChildren(
        renderCandidateTable(reply.candidates, reply.selected_index),
      );
      messageInput.value = "";
      failedText = null;
      clearError();
    } catch (err) {
      failedText = trimmed;
      showError(describe(err), true);
    } finally {
      pending = false;
      refreshControls();
    }
  }

  startBtn.addEventListener("click", () => void startSession());
  messageInput.addEventListener("input", refreshControls);
  sendForm.addEventListener("submit", (event) => {
    event.preventDefault();
    void deliver(messageInput.value);
  });
  retryBtn.addEventListener("click", () => {
    if (failedText !== null) void deliver(failedText);
  });
}
