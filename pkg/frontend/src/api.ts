/** Typed client for the interpreter's HTTP endpoints. */

export interface ExampleEntry {
  name: string;
  source: string;
}

export interface ProcessResult {
  output: string;
  exitCode: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type Fetcher = (input: string, init?: RequestInit) => Promise<Response>;

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") {
      return body.error;
    }
  } catch {
    /* not JSON */
  }
  return response.statusText || `HTTP ${response.status}`;
}

export async function fetchExamples(
  base: string,
  fetcher: Fetcher = fetch,
): Promise<ExampleEntry[]> {
  const response = await fetcher(`${base}/examples`);
  if (!response.ok) {
    throw new ApiError(response.status, await errorMessage(response));
  }
  const entries = (await response.json()) as ExampleEntry[];
  return [...entries].sort((a, b) => a.name.localeCompare(b.name));
}

export async function processProgram(
  base: string,
  program: string,
  fetcher: Fetcher = fetch,
): Promise<ProcessResult> {
  const response = await fetcher(`${base}/process`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ program }),
  });
  if (!response.ok) {
    throw new ApiError(response.status, await errorMessage(response));
  }
  return (await response.json()) as ProcessResult;
}
