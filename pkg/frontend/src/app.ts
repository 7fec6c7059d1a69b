// DOM shell: renders the current ViewState and forwards user actions to
// the API, one request in flight at a time.

import { LsApi } from "./api";
import { qrSvg } from "./qr";
import {
  applyLogin,
  applyRegister,
  applyVerify,
  initialState,
  retry,
  toLogin,
  type ViewState,
} from "./state";

export interface AppOptions {
  apiBase?: string;
}

function esc(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

export class DemoApp {
  state: ViewState = initialState;
  readonly api: LsApi;
  private readonly root: HTMLElement;
  private busy = false;
  private lastOp: Promise<void> = Promise.resolve();
  private smsBody: string | null = null;

  constructor(root: HTMLElement, options: AppOptions = {}) {
    this.root = root;
    this.api = new LsApi(options.apiBase ?? "");
    this.render();
  }

  /** Resolves when the most recent user action has fully settled. */
  idle(): Promise<void> {
    return this.lastOp;
  }

  private run(op: () => Promise<void>): Promise<void> {
    if (this.busy) return this.lastOp; // one in-flight request at a time
    this.busy = true;
    this.lastOp = op().finally(() => {
      this.busy = false;
      this.render();
    });
    return this.lastOp;
  }

  private input(id: string): string {
    return (this.root.querySelector(`#${id}`) as HTMLInputElement | null)?.value ?? "";
  }

  // -- user actions ------------------------------------------------------------

  submitRegister(): Promise<void> {
    const username = this.input("reg-username");
    const password = this.input("reg-password");
    const channel =
      (this.root.querySelector("#reg-channel") as HTMLSelectElement | null)?.value ?? "sms";
    return this.run(async () => {
      this.state = applyRegister(this.state, await this.api.register(username, password, channel));
    });
  }

  continueToLogin(): Promise<void> {
    return this.run(async () => {
      this.state = toLogin(this.state);
    });
  }

  submitLogin(): Promise<void> {
    const username = this.input("login-username");
    const password = this.input("login-password");
    return this.run(async () => {
      this.state = applyLogin(this.state, await this.api.login(username, password));
      this.smsBody = null;
      if (this.state.screen === "challenge") {
        const records = await this.api.inbox("sms");
        this.smsBody = records.length ? records[records.length - 1].body : null;
      }
    });
  }

  submitVerify(): Promise<void> {
    const otp = this.input("otp-input");
    const challengeId = this.state.challengeId;
    if (!challengeId) return this.lastOp;
    return this.run(async () => {
      const result = await this.api.verify(challengeId, otp);
      this.state = applyVerify(this.state, challengeId, result);
    });
  }

  backToLogin(): Promise<void> {
    return this.run(async () => {
      this.state = toLogin(this.state);
    });
  }

  retryFromError(): Promise<void> {
    return this.run(async () => {
      this.state = retry(this.state);
    });
  }

  // -- rendering ---------------------------------------------------------------

  render(): void {
    const { screen } = this.state;
    const notice = this.state.message
      ? `<p class="notice" data-testid="notice">${esc(this.state.message)}</p>`
      : "";
    let body: string;
    switch (screen) {
      case "register":
        body = this.renderRegister(notice);
        break;
      case "login":
        body = this.renderLogin(notice);
        break;
      case "challenge":
        body = this.renderChallenge(notice);
        break;
      case "success":
        body = `
          <h2>Signed in</h2>${notice}
          <p data-testid="session">Session <code>${esc(this.state.sessionId ?? "")}</code></p>
          <button id="logout">Log out</button>`;
        break;
      case "suspended":
        body = `
          <h2>Account suspended</h2>${notice}
          <p data-testid="alarm-note">A break-in alarm has been reported to the administrators.</p>
          <button id="suspended-back">Back to login</button>`;
        break;
      case "error":
        body = `
          <h2>Something went wrong</h2>${notice}
          <button id="retry">Retry</button>`;
        break;
    }
    this.root.innerHTML = `<main class="card" data-screen="${screen}">${body}</main>`;
    this.bind();
  }

  private renderRegister(notice: string): string {
    const receipt = this.state.receipt
      ? `
        <div class="receipt" data-testid="receipt">
          <p>Hello <strong>${esc(this.state.receipt.username)}</strong>. On every future
          login you will receive ${this.state.receipt.n} codes.</p>
          <p class="m-index">Your code is always at position
            <strong data-testid="m-index">${this.state.receipt.mIndex}</strong>
            (0 = OTP, 1 = OTP1, ...).</p>
          <p>This number is shown <em>only once</em> and is stored nowhere you can read it again.</p>
          <button id="reg-continue">Continue to login</button>
        </div>`
      : `
        <form onsubmit="return false">
          <label>Username <input id="reg-username" autocomplete="username"></label>
          <label>Password <input id="reg-password" type="password"></label>
          <label>Alert channel
            <select id="reg-channel">
              <option value="sms">sms</option>
              <option value="email">email</option>
              <option value="call">phone call</option>
            </select>
          </label>
          <button id="reg-submit">Register</button>
          <p><a href="#" id="goto-login">Already registered? Log in</a></p>
        </form>`;
    return `<h2>Create account</h2>${notice}${receipt}`;
  }

  private renderLogin(notice: string): string {
    return `
      <h2>Log in</h2>${notice}
      <form onsubmit="return false">
        <label>Username <input id="login-username" value="${esc(this.state.username ?? "")}"></label>
        <label>Password <input id="login-password" type="password"></label>
        <button id="login-submit">Log in</button>
        <p><a href="#" id="goto-register">Need an account? Register</a></p>
      </form>`;
  }

  private renderChallenge(notice: string): string {
    const figures = (this.state.qrPayloads ?? [])
      .map(
        (p) => `
        <figure class="qr" data-testid="qr-${p.label}">
          ${qrSvg(p.text)}
          <figcaption>${esc(p.label)}</figcaption>
        </figure>`,
      )
      .join("");
    const inbox = this.smsBody
      ? `<div class="inbox" data-testid="dev-inbox">
           <h3>Dev inbox (your phone)</h3>
           <pre>${esc(this.smsBody)}</pre>
         </div>`
      : "";
    return `
      <h2>Second factor</h2>${notice}
      <p>Scan the QR code at <strong>your</strong> position, or read the code from
      the message on your phone, then type it below. Exactly one is real.</p>
      <div class="qr-row" data-testid="qr-row">${figures}</div>
      ${inbox}
      <form onsubmit="return false">
        <label>One-time code <input id="otp-input" autocomplete="one-time-code"></label>
        <button id="verify-submit">Verify</button>
      </form>`;
  }

  private bind(): void {
    const on = (id: string, handler: () => void) => {
      this.root.querySelector(`#${id}`)?.addEventListener("click", handler);
    };
    on("reg-submit", () => void this.submitRegister());
    on("reg-continue", () => void this.continueToLogin());
    on("goto-login", () => void this.continueToLogin());
    on("goto-register", () => {
      void this.run(async () => {
        this.state = { screen: "register", username: this.state.username };
      });
    });
    on("login-submit", () => void this.submitLogin());
    on("verify-submit", () => void this.submitVerify());
    on("suspended-back", () => void this.backToLogin());
    on("logout", () => void this.backToLogin());
    on("retry", () => void this.retryFromError());
  }
}

export function mountApp(root: HTMLElement, options: AppOptions = {}): DemoApp {
  return new DemoApp(root, options);
}
