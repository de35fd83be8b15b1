import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import { ProtocolError, SifoClient } from '../src/client';

function fixtureText(name: string): string {
  const url = new URL(`./fixtures/${name}.json`, import.meta.url);
  return readFileSync(url, 'utf8');
}

interface Recorded {
  url: string;
  method: string;
  body?: unknown;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

/** Scripted fetch stub: answers in order and records every request. */
function scriptedFetch(responses: Response[]) {
  const calls: Recorded[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method ?? 'GET',
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    const next = responses.shift();
    if (!next) throw new Error(`unexpected request ${url}`);
    return next;
  };
  return { impl, calls };
}

const SNAP = JSON.parse(fixtureText('setnumber-fresh'));

describe('SifoClient', () => {
  it('creates sessions with the declassify flag defaulted off', async () => {
    const { impl, calls } = scriptedFetch([jsonResponse(200, SNAP)]);
    const client = new SifoClient('http://svc', impl);
    const snap = await client.createSession('Card', 'setNumber', { id: 's1' });
    expect(snap.class).toBe('Card');
    expect(calls[0].url).toBe('http://svc/session');
    expect(calls[0].body).toEqual({
      id: 's1',
      class: 'Card',
      method: 'setNumber',
      allowDeclassify: false,
    });
  });

  it('sends the revision with every step', async () => {
    const { impl, calls } = scriptedFetch([jsonResponse(200, SNAP)]);
    const client = new SifoClient('http://svc', impl);
    await client.applyStep('s1', 4, 'Variable @ eA2 x');
    expect(calls[0].url).toBe('http://svc/session/s1/step');
    expect(calls[0].body).toEqual({ revision: 4, step: 'Variable @ eA2 x' });
  });

  it('surfaces the server error detail verbatim', async () => {
    const detail = JSON.parse(fixtureText('error-variable'));
    const { impl } = scriptedFetch([jsonResponse(422, detail)]);
    const client = new SifoClient('http://svc', impl);
    const err = await client
      .applyStep('s1', 0, 'Variable @ eA this')
      .then(() => undefined)
      .catch((e) => e as ProtocolError);
    expect(err).toBeInstanceOf(ProtocolError);
    expect(err!.status).toBe(422);
    expect(err!.detail).toEqual(detail.detail);
    expect(err!.detail.rule).toBe('Variable');
    expect(err!.message).toContain("'this' has type low mut Card");
  });

  it('retries exactly once after a revision conflict', async () => {
    const fresh = { ...SNAP, revision: 7 };
    const { impl, calls } = scriptedFetch([
      jsonResponse(409, {
        detail: { error: 'Conflict', message: 'revision 3 is stale (current 7)' },
      }),
      jsonResponse(200, fresh),
      jsonResponse(200, fresh),
    ]);
    const client = new SifoClient('http://svc', impl);
    const snap = await client.applyStepWithRetry('s1', 3, 'Variable @ eA2 x');
    expect(snap.revision).toBe(7);
    expect(calls.map((c) => [c.method, c.url])).toEqual([
      ['POST', 'http://svc/session/s1/step'],
      ['GET', 'http://svc/session/s1'],
      ['POST', 'http://svc/session/s1/step'],
    ]);
    expect(calls[2].body).toEqual({ revision: 7, step: 'Variable @ eA2 x' });
  });

  it('gives up after a second conflict', async () => {
    const conflict = () =>
      jsonResponse(409, { detail: { error: 'Conflict', message: 'stale' } });
    const { impl, calls } = scriptedFetch([
      conflict(),
      jsonResponse(200, { ...SNAP, revision: 9 }),
      conflict(),
    ]);
    const client = new SifoClient('http://svc', impl);
    await expect(
      client.applyStepWithRetry('s1', 1, 'Variable @ eA2 x'),
    ).rejects.toMatchObject({ status: 409 });
    expect(calls).toHaveLength(3);
  });

  it('does not retry non-conflict errors', async () => {
    const { impl, calls } = scriptedFetch([
      jsonResponse(422, {
        detail: { error: 'SideConditionError', rule: 'Variable', message: 'no' },
      }),
    ]);
    const client = new SifoClient('http://svc', impl);
    await expect(
      client.applyStepWithRetry('s1', 0, 'Variable @ eA this'),
    ).rejects.toMatchObject({ status: 422 });
    expect(calls).toHaveLength(1);
  });

  it('fetches rule candidates for a hole', async () => {
    const rules = JSON.parse(fixtureText('rules-ea2'));
    const { impl, calls } = scriptedFetch([jsonResponse(200, rules)]);
    const client = new SifoClient('http://svc', impl);
    const candidates = await client.applicableRules('s1', 'eA2');
    expect(calls[0].url).toBe('http://svc/session/s1/rules/eA2');
    expect(candidates[0]).toEqual({
      rule: 'Variable',
      hole: 'eA2',
      line: 'Variable @ eA2 x',
      name: 'x',
    });
  });

  it('returns the export as plain text', async () => {
    const { impl } = scriptedFetch([
      new Response('low mut method ...', { status: 200 }),
    ]);
    const client = new SifoClient('http://svc', impl);
    expect(await client.exportMethod('s1')).toBe('low mut method ...');
  });

  it('undo posts the current revision', async () => {
    const { impl, calls } = scriptedFetch([jsonResponse(200, SNAP)]);
    const client = new SifoClient('http://svc', impl);
    await client.undo('s1', 2);
    expect(calls[0].url).toBe('http://svc/session/s1/undo');
    expect(calls[0].body).toEqual({ revision: 2 });
  });
});
