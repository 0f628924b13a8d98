import csv
import io
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Union

import aiofiles

from phimdp.config import log
from phimdp.history import Alphabets, History

# 결과 파일 포맷 (CSV / 텍스트)

__all__ = [
    "history_to_csv", "parse_history", "load_history",
    "qtable_to_csv", "curve_to_csv", "rows_to_csv", "manifest_text",
    "write_text", "write_outputs",
]

HISTORY_HEADER = ["t", "a", "o", "r_index", "r_value"]


def _to_csv(header: Sequence[str], rows: List[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


# =========================
# History log
# =========================
def history_to_csv(history: History) -> str:
    """t=0 행은 헤더 쌍 (o_1, r_1), 행동 칸은 비워 둔다"""
    rows = [[0, "", history.initial_observation, history.initial_reward,
             repr(history.reward_value(history.initial_reward))]]
    for t, (a, o, r) in enumerate(zip(history.actions, history.observations, history.rewards), start=1):
        rows.append([t, a, o, r, repr(history.reward_value(r))])
    return _to_csv(HISTORY_HEADER, rows)


def parse_history(text: str, alphabets: Alphabets) -> History:
    lines = text.splitlines()
    if not lines or [c.strip() for c in lines[0].split(",")] != HISTORY_HEADER:
        raise ValueError(f"line 1: expected header {','.join(HISTORY_HEADER)}")
    history = None
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise ValueError(f"line {number}: expected 5 fields, got {len(fields)}")
        try:
            t = int(fields[0])
            o = int(fields[2])
            r_index = int(fields[3])
            if not 0 <= r_index < alphabets.num_rewards:
                raise ValueError(f"reward index {r_index} outside the reward alphabet")
            if history is None:
                if t != 0 or fields[1] != "":
                    raise ValueError("first row must be t=0 with an empty action")
                history = History(alphabets, initial_observation=o, initial_reward=r_index)
                continue
            if t != history.length + 1:
                raise ValueError(f"expected t={history.length + 1}, got {t}")
            history.append_step(int(fields[1]), o, alphabets.reward_values[r_index])
        except ValueError as e:
            raise ValueError(f"line {number}: {e}")
    if history is None:
        raise ValueError("history log has no t=0 row")
    return history


def load_history(path: Union[str, Path], alphabets: Alphabets) -> History:
    return parse_history(Path(path).read_text(encoding="utf-8"), alphabets)


# =========================
# Results
# =========================
def qtable_to_csv(qtable) -> str:
    q = qtable.q
    rows = [[s, a, repr(float(q[s, a]))] for s in range(q.shape[0]) for a in range(q.shape[1])]
    return _to_csv(["state", "action", "q"], rows)


def curve_to_csv(curve: Mapping[int, Sequence[float]]) -> str:
    """checkpoint, mean, run_0 .. run_{k-1}"""
    width = max((len(v) for v in curve.values()), default=0)
    header = ["checkpoint", "mean"] + [f"run_{i}" for i in range(width)]
    rows = []
    for checkpoint in sorted(curve):
        means = list(curve[checkpoint])
        grand = sum(means) / len(means) if means else float("nan")
        rows.append([checkpoint, repr(grand)] + [repr(float(m)) for m in means])
    return _to_csv(header, rows)


def rows_to_csv(rows: List[dict], fieldnames: Sequence[str]) -> str:
    return _to_csv(fieldnames, [[row.get(name, "") for name in fieldnames] for row in rows])


def manifest_text(entries: Mapping[str, object]) -> str:
    return "".join(f"{key}: {value}\n" for key, value in entries.items())


async def write_text(path: Union[str, Path], text: str):
    async with aiofiles.open(path, "w", encoding="utf-8") as f:
        await f.write(text)


async def write_outputs(output_dir: Union[str, Path], files: Dict[str, str]) -> List[Path]:
    directory = Path(output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [directory / name for name in files]
    for path, text in zip(paths, files.values()):
        await write_text(path, text)
    log("write_outputs", f"{len(paths)}개 파일 저장: {directory}", always=True)
    return paths
