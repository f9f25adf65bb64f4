// Browser entry point; tests import boot() from app.ts directly.

import { boot } from "./app";
import { mustElement } from "./dom";

boot({ root: mustElement<HTMLElement>(document, "#app") });
