from dataclasses import dataclass
from itertools import product
from typing import Dict, FrozenSet, Iterator, List, Optional, Set, Tuple

import numpy as np

from phimdp.config import MAX_DEPTH
from phimdp.history import Alphabets, History

# Markov AOCT (action-observation context tree)
# 경로(path)는 루트에서 리프 방향 라벨 튜플: (o_t, a_{t-1}, o_{t-1}, a_{t-2}, ...)
# 짝수 깊이 노드는 |O|개, 홀수 깊이 노드는 |A|개 자식을 가진다 (항상 full branching)

__all__ = [
    "Aoct", "NodeLabels", "StateSuffix", "BOUNDARY", "ContextIndex",
    "root_tree", "map_history", "is_markov", "next_state_table",
    "split", "markov_split", "merge", "markov_merge",
    "split_permits", "merge_permits", "has_split_permit", "has_merge_permit",
    "split_closure", "merge_closure", "refresh_labels",
    "count_aocts", "enumerate_aocts", "serialize_tree", "parse_tree", "suffix_label",
]

Path = Tuple[int, ...]


@dataclass
class NodeLabels:
    mergeable: bool = True
    splittable: bool = True


@dataclass(frozen=True)
class StateSuffix:
    path: Path
    id: int
    boundary: bool = False


# 히스토리가 경로보다 짧을 때 돌려주는 예약 상태 (통계에서 제외)
BOUNDARY = StateSuffix(path=(), id=-1, boundary=True)


class Aoct:
    def __init__(self, alphabets: Alphabets, max_depth: int = MAX_DEPTH):
        if alphabets.num_actions == 1 and alphabets.num_observations == 1 and max_depth > 0:
            # 둘 다 크기 1이면 어떤 분할도 정보가 없다
            max_depth = 0
        self.alphabets = alphabets
        self.max_depth = max_depth
        self.nodes: Dict[Path, NodeLabels] = {(): NodeLabels()}
        self.internal: Set[Path] = set()
        self._ids: Optional[Dict[Path, int]] = None

    def branching(self, depth: int) -> int:
        return self.alphabets.num_observations if depth % 2 == 0 else self.alphabets.num_actions

    def is_leaf(self, path: Path) -> bool:
        return path in self.nodes and path not in self.internal

    def children(self, path: Path) -> List[Path]:
        if path not in self.internal:
            return []
        return [path + (label,) for label in range(self.branching(len(path)))]

    def leaves(self) -> List[Path]:
        return sorted(p for p in self.nodes if p not in self.internal)

    def states(self) -> List[StateSuffix]:
        return [StateSuffix(path=p, id=i) for i, p in enumerate(self.leaves())]

    def state_ids(self) -> Dict[Path, int]:
        if self._ids is None:
            self._ids = {p: i for i, p in enumerate(self.leaves())}
        return self._ids

    @property
    def num_states(self) -> int:
        return len(self.nodes) - len(self.internal)

    @property
    def depth(self) -> int:
        return max(len(p) for p in self.nodes)

    def is_unit_top(self, path: Path) -> bool:
        # 크기 1 알파벳 레벨은 투명: 분기하는 부모 밑의 노드만 분할/병합 단위가 된다
        return path == () or self.branching(len(path) - 1) >= 2

    def structure(self) -> FrozenSet[Path]:
        return frozenset(self.nodes)

    def copy(self) -> "Aoct":
        other = Aoct.__new__(Aoct)
        other.alphabets = self.alphabets
        other.max_depth = self.max_depth
        other.nodes = {p: NodeLabels(l.mergeable, l.splittable) for p, l in self.nodes.items()}
        other.internal = set(self.internal)
        other._ids = None
        return other

    def __eq__(self, other) -> bool:
        # 구조적 동일성: 노드/엣지 집합만 비교 (라벨 제외)
        if not isinstance(other, Aoct):
            return NotImplemented
        return self.alphabets == other.alphabets and self.structure() == other.structure()

    def __hash__(self):
        return hash(self.structure())

    def __repr__(self) -> str:
        return f"Aoct(states={self.num_states}, depth={self.depth})"


def root_tree(alphabets: Alphabets, max_depth: int = MAX_DEPTH) -> Aoct:
    return Aoct(alphabets, max_depth)


# =========================
# History index
# =========================
class ContextIndex:
    """히스토리의 모든 시점 컨텍스트를 max_depth 길이까지 미리 읽어 둔 행렬"""

    def __init__(self, history: History, max_depth: int = MAX_DEPTH):
        self.history = history
        self.max_depth = max_depth
        self.boundary = max_depth // 2
        ctx = np.full((history.length + 1, max(max_depth, 1)), -1, dtype=np.int64)
        for t in range(history.length + 1):
            symbols = history.context(t, max_depth)
            ctx[t, :len(symbols)] = symbols
        self.contexts = ctx

    @property
    def length(self) -> int:
        return self.history.length

    def counted_times(self) -> np.ndarray:
        return np.arange(min(self.boundary, self.length + 1), self.length + 1)

    def occurs(self, path: Path) -> bool:
        rows = self.contexts[self.boundary:]
        if rows.shape[0] == 0:
            return False
        if not path:
            return True
        if len(path) > self.max_depth:
            return False
        return bool(np.all(rows[:, :len(path)] == np.asarray(path), axis=1).any())

    def assign(self, tree: Aoct) -> np.ndarray:
        """시점 t=0..n 마다 상태 id, 경계 구간은 -1"""
        ids = np.full(self.length + 1, -1, dtype=np.int64)
        state_ids = tree.state_ids()
        stack = [((), self.counted_times())]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node not in tree.internal:
                ids[idx] = state_ids[node]
                continue
            symbols = self.contexts[idx, len(node)]
            for child in tree.children(node):
                stack.append((child, idx[symbols == child[-1]]))
        return ids


def map_history(tree: Aoct, history: History, t: int) -> StateSuffix:
    context = history.context(t, tree.max_depth)
    node: Path = ()
    while node in tree.internal:
        if len(node) >= len(context):
            # 히스토리 시작에서 컨텍스트가 끊김
            return BOUNDARY
        node = node + (context[len(node)],)
    return StateSuffix(path=node, id=tree.state_ids()[node])


# =========================
# Markov property
# =========================
def _descend(tree: Aoct, sequence: Path) -> Path:
    node: Path = ()
    for symbol in sequence:
        if node not in tree.internal:
            break
        node = node + (symbol,)
    return node


def _subtree_leaves(tree: Aoct, path: Path) -> List[Path]:
    return [p for p in tree.leaves() if p[:len(path)] == path]


def is_markov(tree: Aoct) -> Tuple[bool, List[Tuple[Path, int, int, List[Path]]]]:
    """모든 (s, a, o)에 대해 s·a·o의 접미사인 상태가 정확히 하나인지 확인"""
    violations = []
    for state in tree.leaves():
        for a in range(tree.alphabets.num_actions):
            for o in range(tree.alphabets.num_observations):
                node = _descend(tree, (o, a) + state)
                if node in tree.internal:
                    violations.append((state, a, o, _subtree_leaves(tree, node)))
    return not violations, violations


def next_state_table(tree: Aoct) -> Dict[Tuple[Path, int, int], Path]:
    ok, violations = is_markov(tree)
    if not ok:
        raise ValueError(f"tree is not Markov: {len(violations)} ambiguous transitions")
    table = {}
    for state in tree.leaves():
        for a in range(tree.alphabets.num_actions):
            for o in range(tree.alphabets.num_observations):
                table[(state, a, o)] = _descend(tree, (o, a) + state)
    return table


# =========================
# Split / merge
# =========================
def _unit_leaves(tree: Aoct, path: Path) -> List[Path]:
    # path를 분할했을 때 생길 리프들 (크기 1 레벨은 통과)
    frontier = [path]
    while True:
        depth = len(frontier[0])
        width = tree.branching(depth)
        frontier = [p + (label,) for p in frontier for label in range(width)]
        if width >= 2:
            return frontier


def _apply_split(tree: Aoct, path: Path, index: Optional[ContextIndex]) -> List[Path]:
    tree._ids = None
    node = path
    while True:
        tree.internal.add(node)
        width = tree.branching(len(node))
        kids = [node + (label,) for label in range(width)]
        for kid in kids:
            tree.nodes[kid] = NodeLabels(
                mergeable=True, splittable=index.occurs(kid) if index is not None else True)
        if width >= 2:
            return kids
        node = kids[0]


def split(tree: Aoct, leaf: Path, index: Optional[ContextIndex] = None) -> Aoct:
    if leaf not in tree.nodes:
        raise ValueError(f"node {leaf} is not in the tree")
    if leaf in tree.internal:
        raise ValueError(f"node {leaf} is internal; only leaves can be split")
    new_leaves = _unit_leaves(tree, leaf)
    if len(new_leaves[0]) > tree.max_depth:
        raise ValueError(f"splitting {leaf} exceeds max_depth={tree.max_depth}")
    result = tree.copy()
    _apply_split(result, leaf, index)
    return result


def split_closure(tree: Aoct, leaf: Path) -> List[Path]:
    """Markov-split 때 같이 분할해야 하는 리프들: p, p[2:], p[4:], ..."""
    closure = [leaf]
    path = leaf
    while len(path) >= 2 and tree.is_leaf(path[2:]):
        path = path[2:]
        closure.append(path)
    return closure


def has_split_permit(tree: Aoct, leaf: Path) -> bool:
    if not tree.is_leaf(leaf) or tree.max_depth == 0:
        return False
    for path in split_closure(tree, leaf):
        if not tree.nodes[path].splittable:
            return False
        if len(_unit_leaves(tree, path)[0]) > tree.max_depth:
            return False
    return True


def markov_split(tree: Aoct, leaf: Path, index: Optional[ContextIndex] = None) -> Aoct:
    if not has_split_permit(tree, leaf):
        raise ValueError(f"node {leaf} has no Markov-split permit")
    result = tree.copy()
    for path in split_closure(tree, leaf):
        _apply_split(result, path, index)
    return result


def _is_merge_unit(tree: Aoct, path: Path) -> bool:
    if path not in tree.internal or not tree.is_unit_top(path):
        return False
    node = path
    while True:
        kids = tree.children(node)
        if len(kids) == 1:
            node = kids[0]
            if node not in tree.internal:
                return False
            continue
        return all(k not in tree.internal for k in kids)


def _local_merge_permit(tree: Aoct, path: Path) -> bool:
    return _is_merge_unit(tree, path) and tree.nodes[path].mergeable


def merge_closure(tree: Aoct, node: Path) -> List[Path]:
    """Markov-merge 때 같이 병합해야 하는 내부 노드들: (o,a)+m 을 재귀적으로"""
    if node == ():
        return [()]
    closure = [node]
    seen = {node}
    queue = [node]
    while queue:
        current = queue.pop(0)
        for o in range(tree.alphabets.num_observations):
            for a in range(tree.alphabets.num_actions):
                extended = (o, a) + current
                if extended in tree.internal and extended not in seen:
                    seen.add(extended)
                    closure.append(extended)
                    queue.append(extended)
    return closure


def has_merge_permit(tree: Aoct, node: Path) -> bool:
    if not _local_merge_permit(tree, node):
        return False
    return all(_local_merge_permit(tree, p) for p in merge_closure(tree, node))


def _apply_merge(tree: Aoct, path: Path, index: Optional[ContextIndex]):
    tree._ids = None
    for p in [p for p in tree.nodes if len(p) > len(path) and p[:len(path)] == path]:
        del tree.nodes[p]
        tree.internal.discard(p)
    tree.internal.discard(path)
    if index is not None:
        tree.nodes[path].splittable = index.occurs(path)


def merge(tree: Aoct, node: Path, index: Optional[ContextIndex] = None) -> Aoct:
    if node not in tree.internal:
        raise ValueError(f"node {node} is not internal; nothing to merge")
    result = tree.copy()
    _apply_merge(result, node, index)
    return result


def markov_merge(tree: Aoct, node: Path, index: Optional[ContextIndex] = None) -> Aoct:
    if not has_merge_permit(tree, node):
        raise ValueError(f"node {node} has no Markov-merge permit")
    result = tree.copy()
    for path in merge_closure(tree, node):
        if path in result.nodes:
            _apply_merge(result, path, index)
    return result


def refresh_labels(tree: Aoct, index: ContextIndex) -> Aoct:
    # 히스토리가 바뀌면 리프의 splittable 라벨을 다시 계산
    for path in tree.leaves():
        tree.nodes[path].splittable = index.occurs(path)
    return tree


def split_permits(tree: Aoct, index: Optional[ContextIndex] = None) -> List[Path]:
    if index is not None:
        refresh_labels(tree, index)
    return [p for p in tree.leaves() if has_split_permit(tree, p)]


def merge_permits(tree: Aoct) -> List[Path]:
    return [p for p in sorted(tree.internal) if has_merge_permit(tree, p)]


# =========================
# Counting
# =========================
def count_aocts(depth: int, num_actions: int, num_observations: int) -> int:
    """깊이 depth 이하 AOCT 개수 K(d), K(d+2) = {[K(d)]^|A| + 1}^|O| + 1"""
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    k = 1 if depth % 2 == 0 else 2
    for _ in range(depth // 2):
        k = (k ** num_actions + 1) ** num_observations + 1
    return k


def _enumerate(depth: int, level: int, num_actions: int, num_observations: int) -> Iterator[FrozenSet[Path]]:
    yield frozenset()
    if depth == 0:
        return
    width = num_observations if level % 2 == 0 else num_actions
    subtrees = list(_enumerate(depth - 1, level + 1, num_actions, num_observations))
    for choice in product(subtrees, repeat=width):
        internal = {()}
        for label, sub in enumerate(choice):
            internal.update((label,) + p for p in sub)
        yield frozenset(internal)


def enumerate_aocts(depth: int, num_actions: int, num_observations: int) -> List[FrozenSet[Path]]:
    """브루트포스: 깊이 depth 이하 모든 AOCT (내부 노드 집합으로 표현)"""
    return list(_enumerate(depth, 0, num_actions, num_observations))


# =========================
# Text format
# =========================
def suffix_label(path: Path, alphabets: Alphabets) -> str:
    symbols = []
    for depth, label in enumerate(path):
        width = alphabets.num_observations if depth % 2 == 0 else alphabets.num_actions
        if width > 1:
            symbols.append(label)
    symbols.reverse()
    sep = "" if max(alphabets.num_actions, alphabets.num_observations) <= 10 else "."
    return sep.join(str(s) for s in symbols)


def serialize_tree(tree: Aoct) -> str:
    a = tree.alphabets
    rewards = ";".join(repr(v) for v in a.reward_values)
    lines = [f"# aoct num_actions={a.num_actions} num_observations={a.num_observations} "
             f"rewards={rewards} max_depth={tree.max_depth}"]
    for path in sorted(tree.nodes):
        labels = tree.nodes[path]
        edge = "-" if not path else str(path[-1])
        lines.append(f"{len(path)},{edge},{int(labels.splittable)},{int(labels.mergeable)}")
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> Aoct:
    lines = [line for line in text.splitlines()]
    if not lines or not lines[0].startswith("# aoct"):
        raise ValueError("line 1: missing '# aoct' header")
    try:
        fields = dict(item.split("=", 1) for item in lines[0].split()[2:])
        alphabets = Alphabets(
            num_actions=int(fields["num_actions"]),
            num_observations=int(fields["num_observations"]),
            reward_values=tuple(float(v) for v in fields["rewards"].split(";")),
        )
        max_depth = int(fields["max_depth"])
    except (KeyError, ValueError) as e:
        raise ValueError(f"line 1: malformed header ({e})")

    tree = Aoct(alphabets, max_depth)
    tree.nodes = {}
    stack: List[Path] = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.strip().split(",")
        if len(parts) != 4:
            raise ValueError(f"line {number}: expected 4 fields, got {len(parts)}")
        try:
            depth = int(parts[0])
            splittable = parts[2] == "1"
            mergeable = parts[3] == "1"
            if parts[2] not in ("0", "1") or parts[3] not in ("0", "1"):
                raise ValueError("labels must be 0 or 1")
            if depth == 0:
                if parts[1] != "-" or tree.nodes:
                    raise ValueError("root must come first with edge '-'")
                path: Path = ()
            else:
                label = int(parts[1])
                stack = stack[:depth]
                if len(stack) != depth:
                    raise ValueError(f"depth {depth} has no parent")
                parent = stack[-1]
                if not 0 <= label < tree.branching(depth - 1):
                    raise ValueError(f"edge label {label} outside alphabet")
                path = parent + (label,)
                tree.internal.add(parent)
        except ValueError as e:
            raise ValueError(f"line {number}: {e}")
        if path in tree.nodes:
            raise ValueError(f"line {number}: duplicate node {path}")
        tree.nodes[path] = NodeLabels(mergeable=mergeable, splittable=splittable)
        stack = stack[:len(path)] + [path]

    if () not in tree.nodes:
        raise ValueError("tree has no root line")
    for parent in tree.internal:
        for label in range(tree.branching(len(parent))):
            if parent + (label,) not in tree.nodes:
                raise ValueError(f"node {parent} is missing child {label} (trees must be full)")
    return tree
