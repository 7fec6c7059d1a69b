// Scripted browser session against a real login server + honeychecker,
// driving the actual DOM app (happy-dom) through register -> login ->
// verify, plus the decoy-suspension path and the challenge-body hygiene
// check. Requires the python package to be installed (`pip install -e ..`).

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createServer } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { mountApp, type DemoApp } from "../src/app";

let hcProc: ChildProcess;
let lsProc: ChildProcess;
let apiBase: string;
let dataDir: string;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no address"));
      }
    });
  });
}

function waitReady(proc: ChildProcess, tag: string): Promise<void> {
  return new Promise((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error(`${tag} not ready`)), 30000);
    let buffer = "";
    proc.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      if (buffer.includes("listening on")) {
        clearTimeout(timer);
        resolve();
      }
    });
    proc.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
    proc.on("exit", () => reject(new Error(`${tag} exited early: ${buffer}`)));
  });
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "twofha-ui-"));
  const hcPort = await freePort();
  const lsPort = await freePort();
  hcProc = spawn("python3", ["-m", "twofha", "serve-hc", "--port", String(hcPort), "--data", join(dataDir, "hc")], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  await waitReady(hcProc, "honeychecker");
  lsProc = spawn(
    "python3",
    [
      "-m", "twofha", "serve-ls",
      "--port", String(lsPort),
      "--hc-port", String(hcPort),
      "--data", join(dataDir, "ls"),
      "--inbox", join(dataDir, "inbox"),
      "--dev-inbox",
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  await waitReady(lsProc, "login server");
  apiBase = `http://127.0.0.1:${lsPort}`;
});

afterAll(() => {
  lsProc?.kill();
  hcProc?.kill();
  rmSync(dataDir, { recursive: true, force: true });
});

function freshApp(): DemoApp {
  document.body.innerHTML = "<div id='app'></div>";
  return mountApp(document.getElementById("app")!, { apiBase });
}

function setInput(id: string, value: string): void {
  (document.getElementById(id) as HTMLInputElement).value = value;
}

function click(id: string): void {
  (document.getElementById(id) as HTMLElement).click();
}

function screen(): string {
  return document.querySelector("main")!.getAttribute("data-screen")!;
}

async function registerAndLogin(app: DemoApp, username: string, password: string) {
  setInput("reg-username", username);
  setInput("reg-password", password);
  click("reg-submit");
  await app.idle();
  const mIndex = Number(document.querySelector("[data-testid=m-index]")!.textContent);

  click("reg-continue");
  await app.idle();
  expect(screen()).toBe("login");
  // the receipt (and M) is gone for good
  expect(document.querySelector("[data-testid=m-index]")).toBeNull();

  setInput("login-username", username);
  setInput("login-password", password);
  click("login-submit");
  await app.idle();
  expect(screen()).toBe("challenge");
  return mIndex;
}

function codesFromInboxPanel(): string[] {
  const body = document.querySelector("[data-testid=dev-inbox] pre")!.textContent!;
  const [first, ...rest] = body.replace("2FHA codes: OTP: ", "").split(/ OTP[0-9]+: /);
  return [first, ...rest];
}

describe("scripted session against the live stack", () => {
  it("completes register -> login -> verify with the code at position M", async () => {
    const app = freshApp();
    expect(screen()).toBe("register");
    const mIndex = await registerAndLogin(app, "ui-alice", "alice1234");

    // challenge page shows all three QR figures, rendered client-side
    const figures = document.querySelectorAll("[data-testid=qr-row] figure svg");
    expect(figures.length).toBe(3);
    const labels = [...document.querySelectorAll("figcaption")].map((f) => f.textContent);
    expect(labels).toEqual(["OTP", "OTP1", "OTP2"]);

    // dev inbox panel shows the delivered SMS
    const codes = codesFromInboxPanel();
    expect(codes.length).toBe(3);

    setInput("otp-input", codes[mIndex]);
    click("verify-submit");
    await app.idle();
    expect(screen()).toBe("success");
    expect(document.querySelector("[data-testid=session]")!.textContent).toContain("Session");
  });

  it("wrong-position (decoy) entry lands on the suspended screen", async () => {
    const app = freshApp();
    const mIndex = await registerAndLogin(app, "ui-mallory", "mallory99");
    const codes = codesFromInboxPanel();
    const decoy = codes[(mIndex + 1) % codes.length];

    setInput("otp-input", decoy);
    click("verify-submit");
    await app.idle();
    expect(screen()).toBe("suspended");
    expect(document.querySelector("[data-testid=alarm-note]")).not.toBeNull();

    // and the account is really suspended server-side
    click("suspended-back");
    await app.idle();
    setInput("login-username", "ui-mallory");
    setInput("login-password", "mallory99");
    click("login-submit");
    await app.idle();
    expect(screen()).toBe("suspended");
  });

  it("typo of the real code stays on the challenge with a notice", async () => {
    const app = freshApp();
    const mIndex = await registerAndLogin(app, "ui-typo", "typo1234");
    const codes = codesFromInboxPanel();
    const real = codes[mIndex];
    const typo = (real[0] === "9" ? "0" : "9") + real.slice(1);

    setInput("otp-input", typo);
    click("verify-submit");
    await app.idle();
    expect(screen()).toBe("challenge");
    expect(document.querySelector("[data-testid=notice]")!.textContent).toMatch(/wrong code/i);

    // recovering with the real code still works
    setInput("otp-input", real);
    click("verify-submit");
    await app.idle();
    expect(screen()).toBe("success");
  });

  it("challenge response body never carries the real position", async () => {
    await fetch(`${apiBase}/register`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ username: "ui-hygiene", password: "hygiene77", channel: "sms" }),
    });
    const response = await fetch(`${apiBase}/login`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ username: "ui-hygiene", password: "hygiene77" }),
    });
    const body = await response.json();
    expect(Object.keys(body).sort()).toEqual(["challenge_id", "delivery", "qr_payloads"]);
    for (const payload of body.qr_payloads) {
      expect(Object.keys(payload).sort()).toEqual(["label", "text"]);
    }
    const raw = JSON.stringify(body);
    expect(raw).not.toContain("m_index");
    expect(raw).not.toContain("index");
  });
});
