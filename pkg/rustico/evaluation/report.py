"""
evaluation reports: per-image CSV, JSON summary, sweep CSV and the paired comparison against a baseline run.
"""
__package__ = 'rustico.evaluation'

import csv
from dataclasses import dataclass, field

import numpy as np

from ..common.errors import DatasetError, EvaluationError
from ..common.logger import get_logger
from ..common.wheel import canonical_float, dump_json, join_path
from .significance import paired_significance

logger = get_logger(__name__)

CENTERLINE = 'centerline'
SEGMENTATION = 'segmentation'

METRIC_COLUMNS = {
    CENTERLINE: ('precision', 'recall', 'f'),
    SEGMENTATION: ('mcc', 'connectivity', 'area', 'length', 'cal'),
}

# scores tested against a baseline, the first one is reported as ``p_value``
COMPARED = {
    CENTERLINE: ('f',),
    SEGMENTATION: ('cal', 'mcc'),
}

REPORT_CSV = 'report.csv'
SUMMARY_JSON = 'summary.json'
SWEEP_CSV = 'sweep.csv'


def _fmt(value):
    return '%.9g' % value


@dataclass
class EvalReport:
    """
    per-image scores at the dataset threshold ``t_star``, their averages and optional p-values against a
    baseline run.

    ``rows`` maps image id to ``{column: value}``; rows are kept sorted by id.
    """
    dataset: str
    metric_set: str
    params: dict
    t_star: float
    rows: dict
    p_values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.metric_set not in METRIC_COLUMNS:
            raise EvaluationError('unknown metric set %r (expected %s)' % (self.metric_set, ', '.join(METRIC_COLUMNS)))
        if not self.rows:
            raise EvaluationError('an evaluation report needs at least one image')
        self.rows = {k: self.rows[k] for k in sorted(self.rows)}

    @property
    def columns(self):
        return METRIC_COLUMNS[self.metric_set]

    @property
    def ids(self):
        return list(self.rows)

    def column(self, name):
        return [self.rows[k][name] for k in self.rows]

    @property
    def averages(self):
        return {c: canonical_float(np.mean(self.column(c))) for c in self.columns}

    @property
    def p_value(self):
        """
        p-value of the primary score (F for centerlines, CAL for segmentations), ``None`` without baseline
        """
        return self.p_values.get(COMPARED[self.metric_set][0])

    def summary(self):
        return {
            'dataset': self.dataset,
            'metric_set': self.metric_set,
            'params': self.params,
            't_star': self.t_star,
            'averages': self.averages,
            'p_value': self.p_value,
            'p_values': {k: canonical_float(v) for k, v in sorted(self.p_values.items())},
        }

    def write_csv(self, path):
        with open(str(path), 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(('id',) + self.columns)
            for k, row in self.rows.items():
                writer.writerow([k] + [_fmt(row[c]) for c in self.columns])
        return path

    def write(self, out_dir):
        """
        ``report.csv`` and ``summary.json`` in ``out_dir``
        """
        self.write_csv(join_path(str(out_dir), REPORT_CSV))
        dump_json(self.summary(), join_path(str(out_dir), SUMMARY_JSON))
        return out_dir

    def compare(self, baseline):
        """
        Wilcoxon p-values of every compared score against ``baseline`` (an :py:class:`EvalReport` or the
        ``{id: {column: value}}`` rows read by :py:func:`read_report_csv`).

        :raises EvaluationError: the two runs do not cover the same ids
        """
        rows = baseline.rows if isinstance(baseline, EvalReport) else baseline
        missing = sorted(set(self.rows) - set(rows))
        extra = sorted(set(rows) - set(self.rows))
        if missing or extra:
            raise EvaluationError('baseline does not match this run: missing ids [%s], unexpected ids [%s]'
                                  % (', '.join(missing), ', '.join(extra)))
        for name in COMPARED[self.metric_set]:
            try:
                theirs = [rows[k][name] for k in self.rows]
            except KeyError:
                raise EvaluationError('baseline has no %r column' % name)
            self.p_values[name] = paired_significance(self.column(name), theirs)
            logger.info('%s: p = %.4g against the baseline', name, self.p_values[name])
        return self.p_values


def read_report_csv(path):
    """
    rows of a ``report.csv`` as ``{id: {column: float}}``
    """
    try:
        with open(str(path), newline='') as f:
            reader = csv.DictReader(f)
            rows = {}
            for record in reader:
                k = record.pop('id')
                rows[k] = {c: float(v) for c, v in record.items()}
    except (IOError, OSError) as e:
        raise DatasetError('cannot read report %s: %s' % (path, e))
    except (KeyError, TypeError, ValueError) as e:
        raise EvaluationError('malformed report %s: %s' % (path, e))
    return rows


def write_sweep_csv(result, path):
    """
    dataset averages of every metric at every grid threshold, the data of a precision-recall curve
    """
    with open(str(path), 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(('threshold',) + tuple(result.names))
        for t, row in zip(result.grid, result.averages):
            writer.writerow(['%.2f' % t] + [_fmt(v) for v in row])
    return path
