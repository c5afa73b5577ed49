"""Exception types shared across the package.

Domain errors map to CLI exit code 1; usage errors are argparse's domain
(exit 2). Every error carries enough context to print a one-line diagnostic.
"""


class MoocMetricsError(Exception):
    """Base class for all domain errors."""


class UnparsableTimestamp(MoocMetricsError):
    def __init__(self, text: str):
        super().__init__(f"unparsable timestamp: {text!r}")
        self.text = text


class StorageFailure(MoocMetricsError):
    pass


class UnknownCourse(MoocMetricsError):
    def __init__(self, course_id: str):
        super().__init__(f"unknown course: {course_id!r}")
        self.course_id = course_id


class UnknownUser(MoocMetricsError):
    def __init__(self, user_id: str):
        super().__init__(f"unknown user: {user_id!r}")
        self.user_id = user_id


class UnknownTableKind(MoocMetricsError):
    def __init__(self, kind: str):
        super().__init__(f"unknown table kind: {kind!r}")
        self.kind = kind


class UnknownVideo(MoocMetricsError):
    def __init__(self, video_id: str):
        super().__init__(f"unknown video: {video_id!r}")
        self.video_id = video_id


class AttemptLimitExceeded(MoocMetricsError):
    def __init__(self, quiz_id: str, attempts: int, limit: int):
        super().__init__(f"quiz {quiz_id!r}: {attempts} attempts exceed limit {limit}")
        self.quiz_id = quiz_id
        self.attempts = attempts
        self.limit = limit


class NoObservations(MoocMetricsError):
    pass


class DegenerateInput(MoocMetricsError):
    pass


class InvalidWeights(MoocMetricsError):
    pass


class SeriesTooShort(MoocMetricsError):
    pass


class EmptyGroup(MoocMetricsError):
    def __init__(self, group: str):
        super().__init__(f"group {group!r} has no members")
        self.group = group


class WeekOutOfRange(MoocMetricsError):
    def __init__(self, week: int, duration_weeks: int):
        super().__init__(f"week {week} outside 1..{duration_weeks}")
        self.week = week


class UnachievableStatus(MoocMetricsError):
    def __init__(self, percent: int, mode: str):
        super().__init__(f"battery status {percent}% is not achievable in {mode} mode")
        self.percent = percent
        self.mode = mode


class InvalidK(MoocMetricsError):
    pass


class RangeInvalid(MoocMetricsError):
    pass


class DegenerateColumn(MoocMetricsError):
    def __init__(self, name: str):
        super().__init__(f"column {name!r} is constant")
        self.name = name


class InvalidSpec(MoocMetricsError):
    pass


# Tabular / anonymization errors


class EmptyFile(MoocMetricsError):
    pass


class RaggedRow(MoocMetricsError):
    def __init__(self, line_no: int, expected: int, got: int):
        super().__init__(f"line {line_no}: expected {expected} cells, got {got}")
        self.line_no = line_no


class NonNumericCell(MoocMetricsError):
    def __init__(self, row: int, col: str, value: str):
        super().__init__(f"row {row}, column {col!r}: {value!r} is not numeric")
        self.row = row
        self.col = col
        self.value = value


class UnevenChains(MoocMetricsError):
    pass


class DuplicateLeaf(MoocMetricsError):
    def __init__(self, leaf: str):
        super().__init__(f"duplicate hierarchy leaf: {leaf!r}")
        self.leaf = leaf


class MissingHierarchyValue(MoocMetricsError):
    def __init__(self, value: str, col: str):
        super().__init__(f"value {value!r} in column {col!r} has no hierarchy chain")
        self.value = value
        self.col = col


class Unsatisfiable(MoocMetricsError):
    pass


class KeyStoreCollision(MoocMetricsError):
    def __init__(self, code: str):
        super().__init__(f"key store maps code {code!r} to a different original")
        self.code = code


class BadConfig(MoocMetricsError):
    pass
