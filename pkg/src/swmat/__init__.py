"""Software maturity benchmark toolkit for PLC projects (SWMAT4aPS).

Two halves: a questionnaire engine that turns answer sets into maturity
scores with cohort comparison and reporting, and a static analyzer for
IEC 61131-3 Structured Text that builds call graphs, measures modularity
and grades architecture.  A code configurator generates ST projects from
templates or parameter tables; its output feeds straight back into the
analyzer.
"""

from .model import (
    AnswerSet,
    CallResolution,
    CallSite,
    Category,
    CompanyCategory,
    Diagnostic,
    GlobalVar,
    GovernanceLevel,
    Grade,
    MaturityReport,
    ModularityAssessment,
    Pou,
    PouKind,
    Project,
    QuestionnaireSchema,
    StructureStyle,
    TaskDef,
    validate_project,
)
from .default_schema import default_schema
from .stparse import SourceFile, parse_file, parse_source
from .project import parse_project, ProjectError
from .graphs import (
    CallGraph,
    GlobalCommGraph,
    build_call_graph,
    build_global_comm_graph,
    complexity,
    emit_dot,
)
from .modularity import (
    CloneReport,
    GovernanceEvidence,
    Thresholds,
    assess_project,
    assessment_score,
    assign_levels,
    classify_structure_style,
    detect_clones,
    detect_cross_cutting,
    estimate_governance,
    grade_meyer,
)
from .maturity import (
    CorrelationResult,
    DegenerateSampleError,
    ScoringError,
    Significance,
    build_report,
    category_maturity,
    cohort_stats,
    complexity_measure,
    interaction_variable,
    overall_maturity,
    pearson,
    score_answer,
)
from .configurator import (
    ConfigError,
    GeneratedProject,
    InstanceSpec,
    ModuleConfig,
    ParameterProject,
    TemplateSet,
    generate_parameter_project,
    generate_template_project,
    specificity_ratio,
)
from .reporting import (
    RadarSeries,
    RadarSpec,
    ScatterPoint,
    emit_overview_csv,
    emit_radar_svg,
    emit_scatter_csv,
)

__version__ = "0.1.0"
