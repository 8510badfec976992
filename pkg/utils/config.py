# ----------------------------------------------------------------------------------------------------
# 작성목적 : 솔버 옵션 로드 (config/solver.yaml + .env / 환경 변수)
# 작성일 : 2025-09-09

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-09 | 최초 구현 | yaml 기본값, SETLOG_* 환경 변수 덮어쓰기 | 이주형
# 2025-09-14 | 번들 라이브러리 목록 | 서버 시작 시 적재할 라이브러리 목록 추가 | 구동빈
# ----------------------------------------------------------------------------------------------------

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv

from models.schemas import SolverOptions

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).parent.parent / "config"
DEFAULT_CONFIG = CONFIG_DIR / "solver.yaml"

# 환경 변수 → SolverOptions 필드
_ENV_FIELDS = {
    "SETLOG_MAX_STEPS": "max_steps",
    "SETLOG_MAX_BRANCHES": "max_branches",
    "SETLOG_LIA_NODE_LIMIT": "lia_node_limit",
    "SETLOG_TIMEOUT_MS": "timeout_ms",
}


def load_config_file(path: Optional[Path] = None) -> Dict[str, Any]:
    """YAML 설정 파일 로드. 없으면 빈 설정"""
    config_file = Path(path) if path else Path(os.getenv("SETLOG_CONFIG", DEFAULT_CONFIG))
    if not config_file.exists():
        logger.warning(f"설정 파일을 찾을 수 없습니다: {config_file} (기본값 사용)")
        return {}
    with open(config_file, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f) or {}
    return data


def _from_yaml(data: Dict[str, Any]) -> Dict[str, Any]:
    values: Dict[str, Any] = dict(data.get("solver") or {})
    ground = data.get("groundsol") or {}
    if "min" in ground:
        values["groundsol_min"] = ground["min"]
    if "max" in ground:
        values["groundsol_max"] = ground["max"]
    batch = data.get("batch") or {}
    if "max_answers" in batch:
        values["max_answers"] = batch["max_answers"]
    return {k: v for k, v in values.items() if v is not None}


def _from_env() -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for env, name in _ENV_FIELDS.items():
        raw = os.getenv(env)
        if raw is None or raw == "":
            continue
        try:
            values[name] = int(raw)
        except ValueError:
            logger.warning(f"환경 변수 {env} 값이 정수가 아닙니다: {raw}")
    return values


def load_options(path: Optional[Path] = None, **overrides: Any) -> SolverOptions:
    """우선순위: overrides (CLI/API) > 환경 변수 > yaml > 모델 기본값"""
    load_dotenv()
    values = _from_yaml(load_config_file(path))
    values.update(_from_env())
    values.update({k: v for k, v in overrides.items() if v is not None})
    options = SolverOptions(**values)
    logger.debug(f"솔버 옵션: {options}")
    return options


def bundled_libraries(path: Optional[Path] = None) -> List[str]:
    """시작 시 적재할 번들 라이브러리 이름 목록"""
    return list(load_config_file(path).get("libraries") or [])


def apply_trace(enabled: bool) -> None:
    """trace 옵션이면 솔버 로거를 DEBUG 로"""
    level = logging.DEBUG if enabled else logging.INFO
    for name in ("services.rewrite", "services.solver", "services.lia", "services.session"):
        logging.getLogger(name).setLevel(level)
