/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_regressor_free: (a: number, b: number) => void;
export const expert_drive: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const regressor_band: (a: number, b: number) => [number, number, number, number];
export const regressor_decide: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const regressor_new: (a: number, b: bigint) => [number, number, number];
export const scan: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
