/** Typed client for the interpreter's HTTP endpoints. */
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
async function errorMessage(response) {
    try {
        const body = await response.json();
        if (body && typeof body.error === "string") {
            return body.error;
        }
    }
    catch {
        /* not JSON */
    }
    return response.statusText || `HTTP ${response.status}`;
}
export async function fetchExamples(base, fetcher = fetch) {
    const response = await fetcher(`${base}/examples`);
    if (!response.ok) {
        throw new ApiError(response.status, await errorMessage(response));
    }
    const entries = (await response.json());
    return [...entries].sort((a, b) => a.name.localeCompare(b.name));
}
export async function processProgram(base, program, fetcher = fetch) {
    const response = await fetcher(`${base}/process`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ program }),
    });
    if (!response.ok) {
        throw new ApiError(response.status, await errorMessage(response));
    }
    return (await response.json());
}
