// Pure view-state machine: API results in, next screen out. All the flow
// rules live here so they can be tested without a DOM or a server.

import type { LoginResult, QrPayloadDto, RegisterResult, VerifyResult } from "./api";

export type Screen = "register" | "login" | "challenge" | "success" | "suspended" | "error";

export interface ViewState {
  screen: Screen;
  /** live challenge (only meaningful on the challenge screen) */
  challengeId?: string;
  qrPayloads?: QrPayloadDto[];
  /** coarse, user-facing notice for the current screen */
  message?: string;
  sessionId?: string;
  /** receipt values shown exactly once, on the register screen */
  receipt?: { username: string; mIndex: number; n: number };
  username?: string;
}

export const initialState: ViewState = { screen: "register" };

export function applyRegister(state: ViewState, result: RegisterResult): ViewState {
  switch (result.kind) {
    case "receipt":
      return {
        screen: "register",
        username: result.receipt.username,
        receipt: {
          username: result.receipt.username,
          mIndex: result.receipt.m_index,
          n: result.receipt.n,
        },
        message: "Registered. Memorize your position - it is shown only once.",
      };
    case "denied":
      return { ...state, message: `Registration failed: ${result.status}` };
    case "network-error":
      return { ...state, screen: "error", message: "Server unreachable." };
  }
}

/** Leaving the register screen drops the receipt; M is never shown again. */
export function toLogin(state: ViewState): ViewState {
  return { screen: "login", username: state.username };
}

export function applyLogin(state: ViewState, result: LoginResult): ViewState {
  switch (result.kind) {
    case "challenge":
      return {
        screen: "challenge",
        username: state.username,
        challengeId: result.challengeId,
        qrPayloads: result.qrPayloads,
      };
    case "denied":
      if (result.status === "suspended") {
        return { screen: "suspended", message: "This account is suspended." };
      }
      return { ...state, screen: "login", message: `Login failed: ${result.status}` };
    case "network-error":
      // keep fields so retry can return without losing anything
      return { ...state, screen: "error", message: "Server unreachable." };
  }
}

export function applyVerify(
  state: ViewState,
  forChallengeId: string,
  result: VerifyResult,
): ViewState {
  if (state.screen !== "challenge" || state.challengeId !== forChallengeId) {
    return state; // stale response for a superseded challenge: discard
  }
  switch (result.kind) {
    case "session":
      return {
        screen: "success",
        username: state.username,
        sessionId: result.sessionId,
      };
    case "denied":
      switch (result.status) {
        case "bad-otp":
          return { ...state, message: "Wrong code - check the position you memorized." };
        case "suspended":
          return {
            screen: "suspended",
            message: "Decoy code submitted: the account is suspended and an alarm was raised.",
          };
        case "challenge-gone":
        case "unknown-challenge":
          return {
            screen: "login",
            username: state.username,
            message: "Challenge expired or already used - log in again.",
          };
        default:
          return { ...state, screen: "error", message: `Verification failed: ${result.status}` };
      }
    case "network-error":
      return { ...state, screen: "error", message: "Server unreachable." };
  }
}

/** Error-screen retry: back to login, keeping the username. */
export function retry(state: ViewState): ViewState {
  return { screen: "login", username: state.username };
}
