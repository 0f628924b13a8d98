import os

from dotenv import load_dotenv

# =========================
# Config
# =========================
load_dotenv()  # .env 파일 로드

OUTPUT_DIR = os.getenv("PHIMDP_OUTPUT_DIR", "results")
MAX_DEPTH = int(os.getenv("PHIMDP_MAX_DEPTH", "12"))  # 컨텍스트 트리 최대 깊이
EVAL_WORKERS = int(os.getenv("PHIMDP_EVAL_WORKERS", "10"))  # 평가 run 동시 실행 수
DEFAULT_SEED = int(os.getenv("PHIMDP_SEED", "1"))
VERBOSE = os.getenv("PHIMDP_VERBOSE", "1") not in ("0", "false", "False", "")

# 에이전트 기본값 (튜닝하지 않은 값 그대로)
COST_ALPHA = 0.1
COST_BETA = 0.1
INITIAL_SAMPLE_NUMBER = 5000
AGENT_LEARNING_LOOPS = 1
ADDITIONAL_SAMPLE_NUMBER = 5000
PT_ITERATIONS = 100
PT_REPLICAS = 10
PT_SWAP_ALPHA0 = 0.7
GAMMA = 0.999999
ETA = 0.01

# AVI 종료 조건
AVI_TOLERANCE = 1e-6
AVI_MAX_SWEEPS = 10_000

# 평가 프로토콜
CHECKPOINTS = (5000, 10000, 20000, 30000, 40000, 50000)
NUM_EVAL_RUNS = 10
EVAL_ACTIONS = 5000


def log(tag: str, message: str, always: bool = False):
    # [함수명] 메시지 형식으로 출력, PHIMDP_VERBOSE=0 이면 요약만
    if always or VERBOSE:
        print(f"[{tag}] {message}")
