/** Wire types of the exploration service. */
export {};
