"""Model and training configuration.

Defaults are the reference hyperparameters for the RAMS-scale model;
the flat key=value config-file format lets experiment scripts override any
field without code changes.
"""

import dataclasses
from dataclasses import dataclass
from typing import Optional, Tuple


class ConfigError(Exception):
    pass


@dataclass
class ModelConfig:
    # embeddings
    word_dim: int = 300
    char_dim: int = 8
    char_filters: int = 50
    use_char_cnn: bool = True
    role_dim: int = 50
    feature_dim: int = 20        # distance and width embedding size
    contextual_layers: int = 0   # 0 disables the precomputed contextual source
    contextual_dim: int = 0

    # recurrent encoder
    lstm_size: int = 200
    lstm_layers: int = 3
    lstm_dropout: float = 0.4
    lexical_dropout: float = 0.5
    ffn_dropout: float = 0.2

    # feed-forward nets
    ffn_size: int = 150
    ffn_layers: int = 2
    event_role_dim: int = 150

    # candidates and pruning
    max_span_width: int = 5
    lambda_a: float = 1.0
    top_k: int = 10

    # link score components; the best model enables s_{A,R} and s_l only
    use_ser: bool = False
    use_sar: bool = True
    use_sl: bool = True
    use_sc: bool = False
    use_distance_feature: bool = True
    distance_buckets: int = 10

    # supervision
    restrict_roles_to_type: bool = False
    epsilon_supervision: bool = True

    # optimization
    learning_rate: float = 0.001
    decay: float = 0.999
    decay_steps: int = 100
    patience: int = 10
    max_epochs: int = 100
    max_train_tokens: int = 1000
    grad_clip: Optional[float] = None
    dev_decoding: str = "greedy"
    seed: int = 13

    def __post_init__(self):
        positive = [
            "word_dim", "char_dim", "char_filters", "role_dim", "feature_dim",
            "lstm_size", "lstm_layers", "ffn_size", "ffn_layers",
            "event_role_dim", "max_span_width", "top_k", "distance_buckets",
            "decay_steps", "max_epochs", "max_train_tokens",
        ]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.lambda_a <= 0:
            raise ConfigError("lambda_a must be positive")
        if self.learning_rate <= 0 or self.decay <= 0:
            raise ConfigError("learning_rate and decay must be positive")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.dev_decoding not in ("argmax", "greedy", "tcd"):
            raise ConfigError(f"unknown dev_decoding {self.dev_decoding!r}")
        if not (self.use_ser or self.use_sar or self.use_sl or self.use_sc):
            raise ConfigError("at least one link score component must be enabled")
        if (self.contextual_layers > 0) != (self.contextual_dim > 0):
            raise ConfigError("contextual_layers and contextual_dim must be set together")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "ModelConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**values)


def _coerce(name: str, raw: str):
    field_types = {f.name: f.type for f in dataclasses.fields(ModelConfig)}
    if name not in field_types:
        raise ConfigError(f"unknown config key {name!r}")
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    if raw.lower() in ("none", "null"):
        return None
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config(path, overrides: Optional[dict] = None) -> ModelConfig:
    """Flat `key = value` config file; later lines and overrides win."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected key = value")
            key, _, raw = line.partition("=")
            values[key.strip()] = _coerce(key.strip(), raw.strip())
    if overrides:
        values.update(overrides)
    return ModelConfig.from_dict(values)
