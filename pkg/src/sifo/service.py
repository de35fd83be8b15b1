"""Session host: HTTP/JSON protocol for the UI plus workspace persistence.

A workspace directory holds `lattice.lat`, `src/*.sifo` and
`sessions/*.ifbc.log`. Step logs are the source of truth: every mutating
request appends to the log before answering, and loading a workspace replays
each log from scratch. Mutating requests carry the session revision for
optimistic concurrency.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from sifo.lattice import SecurityLattice
from sifo.parser import (
    ParseError, parse_lattice, parse_program, parse_script, pretty_expr,
)
from sifo.refiner import (
    IncompleteError, RefinementError, RefinementSession, RefinementStep,
    SideConditionError, UnknownHole, applicable_rules, apply_step,
    export_method, replay, start_session, step_from_script, undo,
    verify_soundness,
)
from sifo.syntax import (
    ClassTable, Decl, Declassify, Expression, FieldAccess, FieldAssign, Hole,
    HoleSpec, If, Literal, New, Seq, SifoType, Var, While, Call, children,
)
from sifo.typechecker import Checker, TypeIssue

FORMAT_VERSION = 1


class CorruptWorkspace(Exception):
    pass


@dataclass
class SessionState:
    session: RefinementSession
    log_path: Path

    @property
    def revision(self) -> int:
        return len(self.session.log)


@dataclass
class Workspace:
    root: Path
    lattice: SecurityLattice = None
    class_table: ClassTable = None
    sessions: dict[str, SessionState] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @classmethod
    def load(cls, root: Path) -> "Workspace":
        ws = cls(root=Path(root))
        lat_path = ws.root / "lattice.lat"
        if not lat_path.exists():
            raise CorruptWorkspace(f"missing lattice config {lat_path}")
        try:
            ws.lattice = parse_lattice(lat_path.read_text(), str(lat_path))
        except ParseError as err:
            raise CorruptWorkspace(str(err))
        decls = []
        src_dir = ws.root / "src"
        for f in sorted(src_dir.glob("*.sifo")) if src_dir.is_dir() else []:
            frag = parse_program(f.read_text(), str(f))
            if frag.diagnostics:
                raise CorruptWorkspace("; ".join(str(d) for d in frag.diagnostics))
            decls.extend(frag.declarations)
        ws.class_table = ClassTable(decls, ws.lattice.bottom)
        sess_dir = ws.root / "sessions"
        for f in sorted(sess_dir.glob("*.ifbc.log")) if sess_dir.is_dir() else []:
            sid = f.name[: -len(".ifbc.log")]
            ws.sessions[sid] = SessionState(ws._replay_log(f), f)
        return ws

    def _replay_log(self, path: Path) -> RefinementSession:
        lines = path.read_text().splitlines()
        if not lines or not lines[0].startswith("#!"):
            raise CorruptWorkspace(f"{path}:1: missing session header line")
        try:
            header = json.loads(lines[0][2:])
            cls, meth = header["class"], header["method"]
            allow = bool(header.get("allowDeclassify", False))
        except (json.JSONDecodeError, KeyError) as err:
            raise CorruptWorkspace(f"{path}:1: bad session header: {err}")
        body = "\n".join(lines[1:])
        try:
            script = parse_script(body, str(path))
            steps = [step_from_script(s) for s in script.steps]
            return replay(self.class_table, self.lattice, cls, meth, steps,
                          allow_declassify=allow)
        except (ParseError, RefinementError) as err:
            raise CorruptWorkspace(f"{path}: {err}")

    def create_session(self, sid: str, class_name: str, method_name: str,
                       allow_declassify: bool = False) -> SessionState:
        sess = start_session(self.class_table, self.lattice, class_name,
                             method_name, allow_declassify=allow_declassify)
        sess_dir = self.root / "sessions"
        sess_dir.mkdir(parents=True, exist_ok=True)
        path = sess_dir / f"{sid}.ifbc.log"
        header = {"class": class_name, "method": method_name,
                  "allowDeclassify": allow_declassify,
                  "formatVersion": FORMAT_VERSION}
        path.write_text("#!" + json.dumps(header, sort_keys=True) + "\n")
        state = SessionState(sess, path)
        self.sessions[sid] = state
        return state

    def persist_step(self, state: SessionState, step: RefinementStep) -> None:
        with state.log_path.open("a") as fh:
            fh.write(step.to_line() + "\n")

    def persist_truncate(self, state: SessionState) -> None:
        lines = state.log_path.read_text().splitlines()
        kept = lines[:1] + [s.to_line() for s in state.session.log]
        state.log_path.write_text("\n".join(kept) + "\n")


# ---------------------------------------------------------------------------
# JSON rendering

def type_json(t: SifoType) -> dict:
    return {"level": t.level, "modifier": t.modifier.value, "class": t.class_name}


def hole_spec_json(hs: HoleSpec, original: Optional[HoleSpec] = None) -> dict:
    rows = []
    for name, t in hs.context.bindings:
        rows.append({"name": name, **type_json(t)})
    return {
        "id": hs.id,
        "context": rows,
        "required": type_json(hs.required),
        "pre": hs.pre,
        "post": hs.post,
    }


def expr_json(e: Expression) -> dict:
    match e:
        case Hole(id=h):
            return {"kind": "hole", "id": h}
        case Var(name):
            return {"kind": "var", "name": name}
        case Literal(k, v):
            return {"kind": "literal", "class": k, "value": v}
        case FieldAccess(recv, f):
            return {"kind": "fieldAccess", "field": f, "recv": expr_json(recv)}
        case FieldAssign(recv, f, value):
            return {"kind": "fieldAssign", "field": f,
                    "recv": expr_json(recv), "value": expr_json(value)}
        case Call(recv, m, args):
            return {"kind": "call", "method": m, "recv": expr_json(recv),
                    "args": [expr_json(a) for a in args]}
        case New(level, cls, args):
            return {"kind": "new", "level": level, "class": cls,
                    "args": [expr_json(a) for a in args]}
        case Seq(first, second):
            return {"kind": "seq", "first": expr_json(first),
                    "second": expr_json(second)}
        case If(guard, then, orelse):
            return {"kind": "if", "guard": expr_json(guard),
                    "then": expr_json(then), "else": expr_json(orelse)}
        case While(guard, body):
            return {"kind": "while", "guard": expr_json(guard),
                    "body": expr_json(body)}
        case Declassify(inner):
            return {"kind": "declassify", "inner": expr_json(inner)}
        case Decl(t, name, init, rest):
            return {"kind": "decl", "type": type_json(t), "name": name,
                    "init": expr_json(init), "rest": expr_json(rest)}
    raise ValueError(f"unknown expression {e!r}")


def session_json(sid: str, state: SessionState) -> dict:
    sess = state.session
    return {
        "id": sid,
        "class": sess.class_name,
        "method": sess.method_name,
        "revision": state.revision,
        "status": sess.status,
        "tree": expr_json(sess.root),
        "holes": [hole_spec_json(hs) for hs in sess.hole_specs],
        "log": [{"rule": s.rule, "hole": s.hole_id, "line": s.to_line()}
                for s in sess.log],
    }


def step_json(step: RefinementStep) -> dict:
    d = {"rule": step.rule, "hole": step.hole_id, "line": step.to_line()}
    if step.name:
        d["name"] = step.name
    if step.level:
        d["level"] = step.level
    if step.type0 is not None:
        d["type"] = type_json(step.type0)
    if step.signature is not None:
        d["signature"] = str(step.signature)
    if step.literal is not None:
        d["literal"] = pretty_expr(step.literal)
    return d


def issue_json(err: TypeIssue) -> dict:
    return {"code": err.code, "rule": err.rule, "message": err.message,
            "span": str(err.span) if err.span else None}


# ---------------------------------------------------------------------------
# HTTP app

def create_app(workspace: Workspace) -> FastAPI:
    app = FastAPI(title="sifo refinement service")
    ws = workspace

    def get_state(sid: str) -> SessionState:
        state = ws.sessions.get(sid)
        if state is None:
            raise HTTPException(404, detail={"error": "NotFound",
                                             "message": f"no session '{sid}'"})
        return state

    @app.get("/methods")
    def list_methods():
        out = []
        for d in ws.class_table.user_decls():
            if d.kind != "class":
                continue
            for m in d.methods:
                out.append({"class": d.name, "method": m.header.name})
        return {"methods": out}

    @app.post("/session")
    async def create_session(request: Request):
        body = await request.json()
        sid = body.get("id") or f"s{len(ws.sessions) + 1}"
        with ws.lock:
            if sid in ws.sessions:
                raise HTTPException(409, detail={"error": "Conflict",
                                                 "message": f"session '{sid}' exists"})
            try:
                state = ws.create_session(
                    sid, body["class"], body["method"],
                    allow_declassify=bool(body.get("allowDeclassify", False)))
            except RefinementError as err:
                raise HTTPException(404, detail={"error": "NotFound",
                                                 "message": str(err)})
        return session_json(sid, state)

    @app.get("/session/{sid}")
    def get_session(sid: str):
        return session_json(sid, get_state(sid))

    @app.post("/session/{sid}/step")
    async def post_step(sid: str, request: Request):
        body = await request.json()
        with ws.lock:
            state = get_state(sid)
            if body.get("revision") != state.revision:
                raise HTTPException(409, detail={
                    "error": "Conflict",
                    "message": f"revision {body.get('revision')} is stale "
                               f"(current {state.revision})"})
            try:
                script = parse_script(body["step"])
                if len(script.steps) != 1:
                    raise HTTPException(400, detail={
                        "error": "BadRequest", "message": "exactly one step per request"})
                step = step_from_script(script.steps[0])
                new_sess = apply_step(state.session, step)
            except ParseError as err:
                raise HTTPException(400, detail={"error": "SyntaxError",
                                                 "message": str(err)})
            except UnknownHole as err:
                raise HTTPException(404, detail={"error": "UnknownHole",
                                                 "message": str(err)})
            except SideConditionError as err:
                raise HTTPException(422, detail={
                    "error": "SideConditionError", "rule": err.rule,
                    "message": err.premise})
            except RefinementError as err:
                raise HTTPException(400, detail={"error": "RefinementError",
                                                 "message": str(err)})
            state.session = new_sess
            ws.persist_step(state, step)
        return session_json(sid, state)

    @app.post("/session/{sid}/undo")
    async def post_undo(sid: str, request: Request):
        body = await request.json()
        with ws.lock:
            state = get_state(sid)
            if body.get("revision") != state.revision:
                raise HTTPException(409, detail={
                    "error": "Conflict",
                    "message": f"revision {body.get('revision')} is stale"})
            try:
                state.session = undo(state.session)
            except RefinementError as err:
                raise HTTPException(422, detail={"error": "EmptyLog",
                                                 "message": str(err)})
            ws.persist_truncate(state)
        return session_json(sid, state)

    @app.get("/session/{sid}/rules/{hole_id}")
    def get_rules(sid: str, hole_id: str):
        state = get_state(sid)
        try:
            candidates = applicable_rules(state.session, hole_id)
        except UnknownHole as err:
            raise HTTPException(404, detail={"error": "UnknownHole",
                                             "message": str(err)})
        return {"hole": hole_id, "candidates": [step_json(s) for s in candidates]}

    @app.get("/session/{sid}/export")
    def get_export(sid: str):
        state = get_state(sid)
        try:
            return PlainTextResponse(export_method(state.session))
        except IncompleteError as err:
            raise HTTPException(422, detail={
                "error": "IncompleteError", "message": str(err),
                "openHoles": err.open_holes})

    @app.get("/session/{sid}/verify")
    def get_verify(sid: str):
        state = get_state(sid)
        try:
            errors = verify_soundness(state.session)
        except IncompleteError as err:
            raise HTTPException(422, detail={
                "error": "IncompleteError", "message": str(err),
                "openHoles": err.open_holes})
        return {"ok": not errors, "diagnostics": [issue_json(e) for e in errors]}

    @app.post("/check")
    async def post_check(request: Request):
        body = await request.json()
        source = body.get("source")
        if source is not None:
            frag = parse_program(source, body.get("file", "<request>"))
            if frag.diagnostics:
                return {"ok": False,
                        "diagnostics": [{"code": "SyntaxError", "rule": "",
                                         "message": d.message, "span": str(d.span)}
                                        for d in frag.diagnostics]}
            try:
                ct = ClassTable(list(ws.class_table.user_decls()) + frag.declarations,
                                ws.lattice.bottom)
            except Exception as err:
                return {"ok": False,
                        "diagnostics": [{"code": "FieldModifierIllegal", "rule": "C-Ok",
                                         "message": str(err), "span": None}]}
        else:
            ct = ws.class_table
        errors = Checker(ct, ws.lattice).check_program()
        return {"ok": not errors, "diagnostics": [issue_json(e) for e in errors]}

    return app


def serve(bind: str, workspace_path: str) -> None:
    import uvicorn

    host, _, port = bind.partition(":")
    ws = Workspace.load(Path(workspace_path))
    app = create_app(ws)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080))
