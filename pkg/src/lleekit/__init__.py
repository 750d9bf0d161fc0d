"""Process semantics for star expressions without 1, and loop elimination.

The toolkit covers: parsing and printing of the expression syntax
(:mod:`lleekit.expr`), charts and the interpretation of expressions as
charts (:mod:`lleekit.chart`), bisimilarity checking and collapse
(:mod:`lleekit.bisim`), loop elimination witnesses and their layered form
(:mod:`lleekit.lee`), reflecting loop structure through a collapse map
(:mod:`lleekit.reflect`), and extraction of solution expressions plus the
end-to-end equivalence decision (:mod:`lleekit.solve`).
"""

from .errors import (
    AssocError,
    EmptyEntrySet,
    InvalidWitness,
    LemmaViolated,
    LleekitError,
    NotABisimulation,
    NotALoopChart,
    NotCollapse,
    NotLEE,
    NotLLEE,
    ParentMismatch,
    ParseError,
    StateExplosion,
    UnknownNode,
)
from .expr import (
    Action,
    Expression,
    Plus,
    Seq,
    Star,
    Zero,
    actions_of,
    parse,
    size,
    unparse,
)
from .chart import (
    Chart,
    NodeSetChart,
    TERMINATION,
    Transition,
    chart_of_nodes,
    interpret,
    simple_cycles,
    step,
    union_chart,
)
from .bisim import (
    BisimMap,
    CollapseResult,
    bisimilarity,
    bisimilarity_partition,
    collapse,
    image,
    is_bisimulation,
)
from .lee import (
    LoopingBackChart,
    ReplayResult,
    ReplayStep,
    Witness,
    all_looping_back_charts,
    check_lbc_properties,
    eliminate,
    find_lee_witness,
    generated_chart,
    is_llee_witness,
    is_loop_chart,
    lee_to_llee,
    looping_back_chart,
    loops_back_to,
    max_entry_set,
)
from .reflect import (
    ImageHierarchy,
    ImageRecord,
    check_lemma_conditions,
    collapse_lee_witness,
    images,
    loop_correspondence,
    well_structured_preimage,
)
from .solve import (
    Certificate,
    Distinction,
    EquationSystem,
    EquivResult,
    Solution,
    equation_system,
    equiv,
    extract_solution,
    is_axiom_instance,
    solution_check,
)

__version__ = "0.1.0"

__all__ = [
    "AssocError",
    "EmptyEntrySet",
    "InvalidWitness",
    "LemmaViolated",
    "LleekitError",
    "NotABisimulation",
    "NotALoopChart",
    "NotCollapse",
    "NotLEE",
    "NotLLEE",
    "ParentMismatch",
    "ParseError",
    "StateExplosion",
    "UnknownNode",
    "Action",
    "Expression",
    "Plus",
    "Seq",
    "Star",
    "Zero",
    "actions_of",
    "parse",
    "size",
    "unparse",
    "Chart",
    "NodeSetChart",
    "TERMINATION",
    "Transition",
    "chart_of_nodes",
    "interpret",
    "simple_cycles",
    "step",
    "union_chart",
    "BisimMap",
    "CollapseResult",
    "bisimilarity",
    "bisimilarity_partition",
    "collapse",
    "image",
    "is_bisimulation",
    "LoopingBackChart",
    "ReplayResult",
    "ReplayStep",
    "Witness",
    "all_looping_back_charts",
    "check_lbc_properties",
    "eliminate",
    "find_lee_witness",
    "generated_chart",
    "is_llee_witness",
    "is_loop_chart",
    "lee_to_llee",
    "looping_back_chart",
    "loops_back_to",
    "max_entry_set",
    "ImageHierarchy",
    "ImageRecord",
    "check_lemma_conditions",
    "collapse_lee_witness",
    "images",
    "loop_correspondence",
    "well_structured_preimage",
    "Certificate",
    "Distinction",
    "EquationSystem",
    "EquivResult",
    "Solution",
    "equation_system",
    "equiv",
    "extract_solution",
    "is_axiom_instance",
    "solution_check",
    "__version__",
]
