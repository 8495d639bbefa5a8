"""Built-in questionnaire: 45 questions in four groups.

Only the four start-up/operation/maintenance questions (36-39) come with a
published fixed scale; every other scored question carries evenly spaced
scores from 5 (best) down to 0 (worst) over invented but plausible answer
levels.  Load a schema file to replace any text, option, score or weight
without touching code.
"""

from __future__ import annotations

from fractions import Fraction

from .model import AnswerMode, Category, Option, Question, QuestionnaireSchema

F = Fraction


def _choices(qid: int, text: str, category: Category, labels: list[tuple[str, str]],
             scores: list[Fraction] | None = None) -> Question:
    n = len(labels)
    if scores is None:
        scores = [F(5) * (n - 1 - i) / (n - 1) for i in range(n)]
    options = tuple(
        Option(key, label, score) for (key, label), score in zip(labels, scores)
    )
    return Question(qid, text, category, F(5), options, AnswerMode.SINGLE_CHOICE)


def _numeric(qid: int, text: str, category: Category = Category.GEN) -> Question:
    return Question(qid, text, category, F(5), (), AnswerMode.NUMERIC)


def _free(qid: int, text: str, category: Category = Category.GEN) -> Question:
    return Question(qid, text, category, F(5), (), AnswerMode.FREE_TEXT)


def default_schema() -> QuestionnaireSchema:
    questions = [
        _numeric(1, "How many engineers and technicians are involved in the development projects?"),
        _numeric(2, "How many engineers and technicians work on-site?"),
        _numeric(3, "How many programmers are employed in the IT department?"),
        _numeric(4, "What number of start-up personnel is employed in the department?"),
        _numeric(5, "How many programmers are on-site (at customer's premises)?"),
        _numeric(6, "How many employees are involved in on-site start-up (at customer's premises)?"),
        _numeric(7, "How many programmers are there per application/machine?"),
        _numeric(8, "How many start-up employees are there per application/machine?"),
        _numeric(9, "Number of CPUs per machine/plant?"),
        _free(10, "Are these CPUs PC-based?"),
        _free(11, "What is the scale of the main applications created in your company?"),
        _numeric(12, "What is the scope of an application: lines of code?"),
        _numeric(13, "What is the scope of an application: number of components?"),
        _numeric(14, "Measure for complexity calculated as 0.5 (CPUs + programmer)"),
        _choices(15, "How is the in-house cooperation arranged?", Category.MOD, [
            ("interdisciplinary-teams", "Interdisciplinary teams with defined interfaces"),
            ("structured-exchange", "Regular structured exchange between departments"),
            ("on-request", "Exchange on request only"),
            ("separated", "Departments work separately"),
        ]),
        _choices(16, "Which documents are exchanged during a development project?", Category.MOD, [
            ("models-and-interfaces", "Requirements, models and interface documents"),
            ("specifications", "Specifications and drawings"),
            ("informal-notes", "Informal notes"),
            ("none", "No documents exchanged"),
        ]),
        _choices(17, "How is the development project documented?", Category.MOD, [
            ("tool-supported", "Tool-supported, kept current"),
            ("guidelines", "Written guidelines, updated per release"),
            ("code-comments", "Code comments only"),
            ("none", "Not documented"),
        ]),
        _choices(18, "Who started the initiative to use modularization?", Category.MOD, [
            ("management", "Company-wide strategic initiative"),
            ("department", "Department-level initiative"),
            ("individual", "Individual programmers"),
        ]),
        _choices(19, "What is modularized?", Category.MOD, [
            ("mechatronic", "Mechatronic units across disciplines"),
            ("software-and-hardware", "Software and hardware separately"),
            ("software-only", "Software only"),
            ("nothing", "Nothing is modularized"),
        ]),
        _choices(20, "Is continuous integration used?", Category.MOD, [
            ("yes", "Yes, for all projects"),
            ("partially", "For selected projects"),
            ("no", "No"),
        ]),
        _choices(21, "If yes, what is the tool chain you use?", Category.MOD, [
            ("integrated", "Integrated automated tool chain"),
            ("partial-tools", "Separate tools, partly automated"),
            ("none", "No tool chain"),
        ]),
        _choices(22, "What programming languages are used in your company?", Category.MOD, [
            ("per-level", "Languages chosen per architectural level"),
            ("mixed-policy", "Several languages with written policy"),
            ("mixed", "Several languages without policy"),
            ("single-unstructured", "One language, no structuring rules"),
        ]),
        _choices(23, "How often are library components used?", Category.MOD, [
            ("always", "In every project"),
            ("often", "Often"),
            ("rarely", "Rarely"),
            ("never", "Never"),
        ]),
        _choices(24, "Please briefly describe the release procedure of library components.", Category.MOD, [
            ("defined-tested", "Defined procedure with tests and approval"),
            ("defined", "Defined procedure"),
            ("informal", "Informal hand-over"),
            ("none", "No release procedure"),
        ]),
        _choices(25, "How is the decision to form new variants made?", Category.MOD, [
            ("defined-process", "Defined decision process"),
            ("case-by-case", "Case by case by senior staff"),
            ("uncontrolled", "Uncontrolled copying"),
        ]),
        _choices(26, "Is your company using a tool for version management?", Category.MOD, [
            ("yes", "Yes, for all code"),
            ("partially", "For parts of the code"),
            ("no", "No"),
        ]),
        _choices(27, "How are changes for versions in your company tracked?", Category.MOD, [
            ("tool-complete", "Tool-supported, complete history"),
            ("tool-partial", "Tool-supported for some artifacts"),
            ("manual", "Manual lists"),
            ("none", "Not tracked"),
        ]),
        _choices(28, "How often is code generation from EPLAN or other engineering tools applied?", Category.MOD, [
            ("often", "Often"),
            ("sometimes", "Sometimes"),
            ("rarely", "Rarely"),
            ("never", "Never"),
        ]),
        _choices(29, "Which tools/models are used for code generation in your company?", Category.MOD, [
            ("integrated-models", "Engineering models integrated with generation"),
            ("scripts", "In-house scripts"),
            ("none", "None"),
        ]),
        _choices(30, "Are projects configured automatically from libraries based on templates?", Category.MOD, [
            ("yes", "Yes"),
            ("partially", "Partially"),
            ("no", "No"),
        ]),
        _choices(31, "Are there any quality gates before adding a new library component?", Category.TEST, [
            ("yes", "Yes, enforced"),
            ("partially", "Defined but not enforced"),
            ("no", "No"),
        ]),
        _choices(32, "What quality assurance measures are used in your company?", Category.TEST, [
            ("reviews-and-tests", "Code reviews and systematic tests"),
            ("systematic-tests", "Systematic tests"),
            ("ad-hoc-tests", "Ad-hoc tests"),
            ("none", "None"),
        ]),
        _choices(33, "What scenarios are tested or what requirements have to be met by the created tests?", Category.TEST, [
            ("faults-and-alarms", "Normal operation, faults and all alarms"),
            ("selected-faults", "Normal operation and selected faults"),
            ("normal-only", "Normal operation only"),
            ("none", "Nothing is tested against requirements"),
        ]),
        _choices(34, "How is the software tested?", Category.TEST, [
            ("automated", "Automated tests"),
            ("partially-automated", "Partially automated"),
            ("manual", "Manual tests"),
            ("none", "Not tested"),
        ]),
        _choices(35, "Are simulations used for testing?", Category.TEST, [
            ("regularly", "Regularly"),
            ("specific-cases", "For specific challenges"),
            ("rarely", "Rarely"),
            ("never", "Never"),
        ]),
        _choices(36, "Is the start-up of the machine/plant done on-site by the designer/programmer?", Category.OP, [
            ("never", "Never"),
            ("rarely", "Rarely"),
            ("sometimes", "Sometimes"),
            ("very-often", "Very often"),
        ], [F(5), F("3.25"), F("2.5"), F(0)]),
        _choices(37, "How is the delivery to the customer conducted?", Category.OP, [
            ("no-source", "Customer does not receive the source code"),
            ("parts", "Customer only receives parts of the source code"),
            ("whole-source", "Customer receives the whole source code"),
        ], [F(5), F("2.5"), F(0)]),
        _choices(38, "How are updates installed?", Category.OP, [
            ("remote-and-on-demand", "Remote maintenance and on demand"),
            ("remote", "Remote maintenance"),
            ("on-site", "On site"),
        ], [F(5), F(4), F(2)]),
        _choices(39, "Does the service department know the current customer's software status on-site?", Category.OP, [
            ("very-often", "Very often"),
            ("often", "Often"),
            ("rarely", "Rarely"),
            ("never", "Never"),
        ], [F(5), F("3.75"), F("1.25"), F(0)]),
        _free(40, "How long does a typical start-up process take?"),
        _free(41, "How are new elements added to libraries?"),
        _free(42, "Please describe the release procedure of a library element (from implementation/programming of the element to its library integration)"),
        _free(43, "By whom is the start-up of the machine/plant done on-site otherwise?"),
        _free(44, "On which level of the software do you use which programming language?"),
        _free(45, "Which are the most critical technical tasks to be automatically controlled in your applications?"),
    ]
    return QuestionnaireSchema(tuple(questions))
