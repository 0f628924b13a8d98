"""GSΦA: 컨텍스트 트리 기반 feature RL 에이전트."""

__version__ = "0.1.0"
