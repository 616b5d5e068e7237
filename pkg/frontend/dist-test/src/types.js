// Wire payload mirrors. The server is authoritative for every rule; the
// client never computes grades or eligibility locally.
export {};
