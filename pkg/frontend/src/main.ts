import { mountApp } from "./app";
import "./style.css";

// same-origin by default (the login server serves dist/); override with
// ?api=http://host:port for the vite dev server
const params = new URLSearchParams(window.location.search);
mountApp(document.getElementById("app")!, { apiBase: params.get("api") ?? "" });
