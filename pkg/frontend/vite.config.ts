import { defineConfig } from "vite";

export default defineConfig({
  // relative base so the bundle works when the login server serves dist/
  base: "./",
  build: { outDir: "dist" },
  test: {
    environment: "happy-dom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
