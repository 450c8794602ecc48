"""Event records exchanged between the handover engine, KPI ledger and MRO."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

KINDS = (
    "prep",          # preparation request delivered (from serving to target)
    "prep_ready",    # target holds resources for the UE
    "rel",           # preparation released; cause says why
    "rep",           # replace: to_cell admitted, the weakest cell released (see rel/replace)
    "exec_start",    # random access towards a prepared target begins
    "ho_success",
    "hof",
    "rlf",
    "reestablish",
    "report_lost",
    "panel_switch",  # from_cell/to_cell carry the old/new panel index
)

RELEASE_CAUSES = ("release-event", "replace", "reactive-blocklist", "post-ho-cho",
                  "reestablish", "ho-into")


@dataclass(frozen=True, slots=True)
class Event:
    t_ms: int
    ue: int
    kind: str
    from_cell: int = -1
    to_cell: int = -1
    cause: str = ""

    def to_json(self) -> str:
        return json.dumps({"t_ms": self.t_ms, "ue": self.ue, "kind": self.kind,
                           "from_cell": self.from_cell, "to_cell": self.to_cell,
                           "cause": self.cause}, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "Event":
        d = json.loads(line)
        return cls(int(d["t_ms"]), int(d["ue"]), d["kind"], int(d.get("from_cell", -1)),
                   int(d.get("to_cell", -1)), d.get("cause", ""))


def write_events(events, path) -> None:
    with open(Path(path), "w") as fh:
        for ev in events:
            fh.write(ev.to_json())
            fh.write("\n")


def read_events(path) -> list[Event]:
    with open(Path(path)) as fh:
        return [Event.from_json(line) for line in fh if line.strip()]


def events_to_text(events) -> str:
    return "".join(ev.to_json() + "\n" for ev in events)
