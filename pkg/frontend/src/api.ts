// Typed client for the login server's HTTP/JSON API.
// Error bodies carry {"status": "<reason-token>"}; transport failures are
// surfaced separately so the UI can offer a retry.

export interface QrPayloadDto {
  label: string;
  text: string;
}

export interface RegisterReceipt {
  username: string;
  m_index: number;
  n: number;
}

export type RegisterResult =
  | { kind: "receipt"; receipt: RegisterReceipt }
  | { kind: "denied"; status: string; httpStatus: number }
  | { kind: "network-error"; message: string };

export type LoginResult =
  | { kind: "challenge"; challengeId: string; qrPayloads: QrPayloadDto[] }
  | { kind: "denied"; status: string; httpStatus: number }
  | { kind: "network-error"; message: string };

export type VerifyResult =
  | { kind: "session"; sessionId: string; expiresAt: number }
  | { kind: "denied"; status: string; httpStatus: number }
  | { kind: "network-error"; message: string };

export interface InboxRecord {
  ts: number;
  kind: string;
  recipient: string;
  body: string;
}

async function post(base: string, path: string, body: unknown): Promise<Response> {
  return fetch(`${base}${path}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}

export class LsApi {
  constructor(private readonly base: string = "") {}

  async register(username: string, password: string, channel = "sms"): Promise<RegisterResult> {
    let response: Response;
    try {
      response = await post(this.base, "/register", { username, password, channel });
    } catch (err) {
      return { kind: "network-error", message: String(err) };
    }
    const data = await response.json();
    if (response.ok) {
      return { kind: "receipt", receipt: data as RegisterReceipt };
    }
    return { kind: "denied", status: data.status ?? "error", httpStatus: response.status };
  }

  async login(username: string, password: string): Promise<LoginResult> {
    let response: Response;
    try {
      response = await post(this.base, "/login", { username, password });
    } catch (err) {
      return { kind: "network-error", message: String(err) };
    }
    const data = await response.json();
    if (response.ok) {
      return {
        kind: "challenge",
        challengeId: data.challenge_id,
        qrPayloads: data.qr_payloads as QrPayloadDto[],
      };
    }
    return { kind: "denied", status: data.status ?? "error", httpStatus: response.status };
  }

  async verify(challengeId: string, otp: string): Promise<VerifyResult> {
    let response: Response;
    try {
      response = await post(this.base, "/verify", { challenge_id: challengeId, otp });
    } catch (err) {
      return { kind: "network-error", message: String(err) };
    }
    const data = await response.json();
    if (response.ok) {
      return { kind: "session", sessionId: data.session_id, expiresAt: data.expires_at };
    }
    return { kind: "denied", status: data.status ?? "error", httpStatus: response.status };
  }

  /** Dev-only peek at the simulated SMS inbox (needs --dev-inbox on the server). */
  async inbox(kind = "sms"): Promise<InboxRecord[]> {
    try {
      const response = await fetch(`${this.base}/dev/inbox?kind=${kind}`);
      if (!response.ok) return [];
      const data = await response.json();
      return (data.records ?? []) as InboxRecord[];
    } catch {
      return [];
    }
  }
}
