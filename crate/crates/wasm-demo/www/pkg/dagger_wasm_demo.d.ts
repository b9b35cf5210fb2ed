/* tslint:disable */
/* eslint-disable */

/**
 * Small 1-D regressor trained on a noisy sine with a hole in the data,
 * used to show MC-dropout spread and the resulting decision.
 */
export class Regressor {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Mean and two-standard-deviation band over `samples` dropout passes.
     */
    band(samples: number): string;
    /**
     * Dropout decision rule at input `x`, with the true function as expert.
     */
    decide(x: number, tau: number, p: number, samples: number): string;
    constructor(dropout: number, seed: bigint);
}

/**
 * Expert-only episode from a chosen start pose, plus the Dubins plan made
 * at that pose.
 */
export function expert_drive(x: number, y: number, theta: number, open_loop: boolean): string;

/**
 * True and corrupted lidar ranges from a pose in the default room.
 */
export function scan(x: number, y: number, theta: number, sigma1: number, sigma2: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_regressor_free: (a: number, b: number) => void;
    readonly expert_drive: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly regressor_band: (a: number, b: number) => [number, number, number, number];
    readonly regressor_decide: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly regressor_new: (a: number, b: bigint) => [number, number, number];
    readonly scan: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
