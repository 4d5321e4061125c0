"""Wrapper feature-subset selection with accumulated subset evidence."""

from accumsel.dataset import (
    Dataset,
    DataError,
    ParseError,
    SplitPlan,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    make_5x2_plan,
    write_csv,
)
from accumsel.mask import FeatureMask
from accumsel.inducers import (
    CallCounter,
    FunctionScorer,
    InducerKind,
    SingularCovarianceError,
    SubsetScorer,
    fit_predict_lda,
    predict_1nn,
    score_subset,
)
from accumsel.relevance import (
    AccumulatorTable,
    ExactOracleResult,
    Weighting,
    accumulate,
    estimated_relevance,
    exact_relevance,
)
from accumsel.search import (
    SearchConfig,
    SearchTrace,
    SelectionResult,
    run_search,
    run_sbg,
    run_sbg_plus,
    run_sfg,
    run_sfg_plus,
)
from accumsel.prefilter import GeneRanking, bss_wss_rank, select_top_k
from accumsel.harness import ExperimentConfig, ExperimentReport, run_experiment, write_report

__version__ = "0.1.0"
