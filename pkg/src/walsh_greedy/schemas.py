from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

ComplexPair = Tuple[float, float]  # (re, im)
CertificateKindName = Literal["lemma1", "lemma2", "correction"]


class StepFunctionModel(BaseModel):
    order: int = Field(ge=2)
    level: int = Field(ge=0)
    values: List[ComplexPair]  # one [re, im] per level-J cell


class CoefficientModel(BaseModel):
    n: int = Field(ge=0)
    re: float
    im: float = 0.0


class SpectrumModel(BaseModel):
    order: int = Field(ge=2)
    source_level: int = Field(ge=0)
    coefficients: List[CoefficientModel]  # sorted by n


class PolynomialModel(BaseModel):
    order: int = Field(ge=2)
    coefficients: List[CoefficientModel]  # strictly increasing n


class CellSetModel(BaseModel):
    order: int = Field(ge=2)
    level: int = Field(ge=0)
    members: List[int]


class ConclusionModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    relation: Literal["<", "<=", ">", ">=", "=="]
    claimed_bound: float
    achieved_value: float
    passed: bool = Field(alias="pass")
    slack: float
    asserted: bool = True
    note: Optional[str] = None


class Lemma1Artifacts(BaseModel):
    gamma: ComplexPair
    n0: int
    eps: float
    interval: str  # "m:k"
    polynomial: PolynomialModel
    kept_set: CellSetModel


class Lemma2Artifacts(BaseModel):
    f: StepFunctionModel
    g: StepFunctionModel
    kept_set: CellSetModel
    polynomial: PolynomialModel
    intervals: List[str]
    gammas: List[ComplexPair]
    residual: float
    budget: float
    magnitude_cap_used: float
    smallness_bound: Optional[float] = None
    n0: int
    eps: float
    magnitude_cap: Optional[float] = None
    profile: Literal["verbatim", "relaxed"]


class StepRecordModel(BaseModel):
    q: int
    budget: float
    target_distance: float
    residual_l1: float
    block_range: Tuple[int, int]
    block_magnitude: float
    min_magnitude: float
    terms: int
    dictionary_index: Optional[int] = None
    partial_sum_sup_l1: Optional[float] = None


class CorrectionArtifacts(BaseModel):
    f: StepFunctionModel
    g: StepFunctionModel
    kept_set: CellSetModel
    series: PolynomialModel
    trace: List[StepRecordModel]
    eps: float
    tol: float
    q_max: int
    n0: int
    profile: Literal["verbatim", "relaxed"]
    mode: Literal["direct", "strict"]
    stop_reason: Literal["converged", "q_max", "resolution", "search_exhausted"]


class CertificateFile(BaseModel):
    kind: CertificateKindName
    schema_version: int = 1
    passed: bool
    conclusions: List[ConclusionModel]
    params: Dict[str, Any] = Field(default_factory=dict)
    trace: List[Dict[str, Any]] = Field(default_factory=list)
    artifacts: Dict[str, Any]  # validated against the model matching `kind`
