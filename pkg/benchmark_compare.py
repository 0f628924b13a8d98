import os
import time

from phimdp.agent import AgentConfig, run_learning_curve
from phimdp.config import CHECKPOINTS, DEFAULT_SEED, EVAL_ACTIONS, NUM_EVAL_RUNS, OUTPUT_DIR
from phimdp.environments import ENVIRONMENTS, oracle_value
from phimdp.utils.csv_io import curve_to_csv

# 네 도메인을 기본 설정으로 돌려서 비교 기준(oracle)과 나란히 출력
# 그리드 oracle은 위치를 아는 에이전트 기준이라 관측이 없는 에이전트는 닿을 수 없다

DOMAINS = list(ENVIRONMENTS)
BENCHMARK_DIR = os.path.join(OUTPUT_DIR, "benchmark")


def run_domain(name: str, seed: int = DEFAULT_SEED):
    start = time.time()
    curve = run_learning_curve(name, AgentConfig(seed=seed), CHECKPOINTS, NUM_EVAL_RUNS, EVAL_ACTIONS)
    return curve, time.time() - start


def main():
    os.makedirs(BENCHMARK_DIR, exist_ok=True)
    for name in DOMAINS:
        curve, elapsed = run_domain(name)
        oracle = oracle_value(name)

        print(f"\n도메인: {name}")
        print(f"트리 상태 수 → {curve.result.tree.num_states} (깊이 {curve.result.tree.depth})")
        print(f"기준값 → {oracle:.4f} / action")
        for checkpoint, mean in curve.means().items():
            ratio = mean / oracle if oracle else float("nan")
            print(f"  {checkpoint:>6} cycles: {mean:.4f} (기준 대비 {ratio:.2f})")
        print(f"처리시간: {elapsed:.1f}s")

        path = os.path.join(BENCHMARK_DIR, f"{name}_curve.csv")
        with open(path, "w", encoding="utf-8") as f:
            f.write(curve_to_csv(curve.points))

    print(f"\n곡선 저장: {BENCHMARK_DIR}")


if __name__ == "__main__":
    main()
