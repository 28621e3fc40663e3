"use strict";
/** Payload shapes served under /api/v1; the UI computes nothing the API
 * already provides, only layout. */
Object.defineProperty(exports, "__esModule", { value: true });
