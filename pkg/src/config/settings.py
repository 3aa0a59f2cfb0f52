from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Sequence, Tuple
import logging
import yaml

from src.grid.builder import GridConfig
from src.grid.models import NodeSet
from src.utils.constants import LOGGER_NAME, METRIC_SETTINGS, RENDER_SETTINGS, SEARCH_DEFAULTS
from src.utils.errors import ConfigError

logger = logging.getLogger(LOGGER_NAME)

class ResolvedParams(BaseModel):
    """Search and layout parameters with every threshold in map units"""

    model_config = ConfigDict(frozen=True)

    resolution: float
    omega: float
    k: int
    k_rc3: int
    t_a: float
    t_d: float
    t_f: float
    pl_pen: float
    g_im: float

    # Strategy switches
    acute_penalty: bool = True          # st1
    short_edge_penalty: bool = True     # st2
    restrict_directions: bool = True    # st3
    accumulation_weights: bool = True   # st4
    exclude_committed: bool = True      # st5
    exclude_destinations: bool = True   # st6
    type1_first: bool = True            # st7

class RunConfig(BaseSettings):
    """Run configuration; environment variables use the FLOWGRID_ prefix"""

    # Path length and search
    omega: float = SEARCH_DEFAULTS['OMEGA']
    k: int = SEARCH_DEFAULTS['K']
    k_rc3: int = SEARCH_DEFAULTS['K_RC3']
    t_a: float = SEARCH_DEFAULTS['T_A']
    t_d: float = SEARCH_DEFAULTS['T_D']            # units of Rs
    t_f: Optional[float] = None                     # default: max destination volume
    pl_pen: float = SEARCH_DEFAULTS['PL_PEN']       # units of Rs
    g_im: float = SEARCH_DEFAULTS['G_IM']           # units of Rs

    # Grid
    extent_mode: Literal['points', 'regions'] = 'points'
    resolution: Optional[float] = None              # Rs override, map units
    refine_resolution: bool = False

    # Rendering
    w_max: float = RENDER_SETTINGS['W_MAX']
    w_min: float = RENDER_SETTINGS['W_MIN']
    draw_thin_first: bool = False
    stroke_color: str = RENDER_SETTINGS['STROKE_COLOR']
    canvas_width_mm: float = RENDER_SETTINGS['CANVAS_WIDTH_MM']
    show_regions: bool = True

    # Metrics
    el_thresholds: Tuple[float, ...] = METRIC_SETTINGS['EL_THRESHOLDS']

    # Ablation switches, all on by default
    st1: bool = True
    st2: bool = True
    st3: bool = True
    st4: bool = True
    st5: bool = True
    st6: bool = True
    st7: bool = True

    # Execution
    threads: int = Field(default=1, ge=1)
    progress: bool = False

    model_config = SettingsConfigDict(
        env_prefix="FLOWGRID_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        validate_assignment=True,
        extra="ignore",
    )

    @field_validator('omega')
    @classmethod
    def _check_omega(cls, v: float) -> float:
        if not 0 < v <= 1:
            raise ValueError("omega must lie in (0, 1]")
        return v

    @field_validator('t_a')
    @classmethod
    def _check_t_a(cls, v: float) -> float:
        if not 0 < v < 180:
            raise ValueError("t_a must lie in (0, 180) degrees")
        return v

    @field_validator('t_d', 'pl_pen', 'g_im', 'canvas_width_mm')
    @classmethod
    def _check_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("must be positive")
        return v

    @field_validator('t_f', 'resolution')
    @classmethod
    def _check_optional_positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not v > 0:
            raise ValueError("must be positive when given")
        return v

    @field_validator('k', 'k_rc3')
    @classmethod
    def _check_window(cls, v: int) -> int:
        if v < 0:
            raise ValueError("window radius must be nonnegative")
        return v

    @field_validator('el_thresholds')
    @classmethod
    def _sort_thresholds(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(t <= 0 for t in v):
            raise ValueError("thresholds must be positive")
        return tuple(sorted(v, reverse=True))

    @model_validator(mode='after')
    def _check_widths(self) -> 'RunConfig':
        if not self.w_max > self.w_min > 0:
            raise ValueError("widths must satisfy w_max > w_min > 0")
        return self

    @property
    def strategies(self) -> Dict[str, bool]:
        return {f"st{i}": getattr(self, f"st{i}") for i in range(1, 8)}

    def grid_config(self) -> GridConfig:
        """Grid settings for build_grid"""
        return GridConfig(
            extent_mode=self.extent_mode,
            resolution=self.resolution,
            refine_resolution=self.refine_resolution,
        )

    def resolve(self, nodes: NodeSet, resolution: float) -> ResolvedParams:
        """Express Rs-relative thresholds in map units"""
        return ResolvedParams(
            resolution=resolution,
            omega=self.omega,
            k=self.k,
            k_rc3=self.k_rc3,
            t_a=self.t_a,
            t_d=self.t_d * resolution,
            t_f=self.t_f if self.t_f is not None else nodes.max_volume,
            pl_pen=self.pl_pen * resolution,
            g_im=self.g_im * resolution,
            acute_penalty=self.st1,
            short_edge_penalty=self.st2,
            restrict_directions=self.st3,
            accumulation_weights=self.st4,
            exclude_committed=self.st5,
            exclude_destinations=self.st6,
            type1_first=self.st7,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Layout-relevant fields; execution settings do not change results"""
        data = self.model_dump(exclude={'threads', 'progress'})
        data['el_thresholds'] = list(self.el_thresholds)
        return data

def get_settings(**overrides: Any) -> RunConfig:
    """Load a validated RunConfig; overrides win over the environment"""
    unknown = sorted(set(overrides) - set(RunConfig.model_fields))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    try:
        return RunConfig(**overrides)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        raise ConfigError(str(e)) from e

def with_overrides(cfg: RunConfig, **overrides: Any) -> RunConfig:
    """Validated copy of cfg with some fields replaced"""
    unknown = sorted(set(overrides) - set(RunConfig.model_fields))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    try:
        return RunConfig(**{**cfg.model_dump(), **overrides})
    except ValidationError as e:
        raise ConfigError(str(e)) from e

def _inline_value(key: str, raw: str) -> Any:
    if key == 'el_thresholds':
        return tuple(float(v) for v in raw.split(',') if v.strip())
    return yaml.safe_load(raw) if raw.strip() else None

def load_overrides(items: Sequence[str]) -> Dict[str, Any]:
    """
    Merge `--config` items left to right

    Args:
        items: YAML file paths (a mapping of RunConfig keys) or key=value pairs
    """
    overrides: Dict[str, Any] = {}
    for item in items:
        if '=' in item:
            key, raw = item.split('=', 1)
            key = key.strip().lower()
            try:
                overrides[key] = _inline_value(key, raw)
            except (ValueError, yaml.YAMLError) as e:
                raise ConfigError(f"bad value for '{key}': {raw}") from e
            continue

        path = Path(item)
        try:
            data = yaml.safe_load(path.read_text(encoding='utf-8')) or {}
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"Failed to read config file {path}: {e}")
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a mapping")
        for key, value in data.items():
            if key == 'el_thresholds' and isinstance(value, list):
                value = tuple(value)
            overrides[str(key).lower()] = value
    return overrides
