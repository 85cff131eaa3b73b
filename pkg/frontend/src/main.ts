import { ApiClient } from "./api";
import { App } from "./components";
import { AppStore } from "./store";

const store = new AppStore(new ApiClient(""));
const app = new App(store, document.getElementById("app")!);
void app.start();
