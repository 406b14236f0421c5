import { CurationApi } from "./api.js";
import { CurationApp } from "./ui.js";

const app = new CurationApp(new CurationApi(""));
void app.start();

// refetch on focus so concurrent voters see each other's tallies
window.addEventListener("focus", () => void app.start());
