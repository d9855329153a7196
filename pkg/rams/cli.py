#!python3

## Import General Tools
import sys
import time
import logging
import argparse
from pathlib import Path
import numpy as np
import yaml
from astropy.table import Table, MaskedColumn

from .numerics import NumericsError
from .system_config import SystemConfig, SystemConfigError
from .channel import ChannelError, realize_channels
from .beamspace import BeamspaceError
from .rate import CapacityError, search_space_size, feedback_bits
from .analysis import (AnalysisError, GaussianRateModel, avg_gain_integral,
                       avg_gain_small, avg_gain_large, avg_gain_asymptotic,
                       outage_gain, outage_gain_asymptotic,
                       states_for_target_gain)
from .simlab import (SimLabError, ExperimentReport, simulate, fit_rate_model,
                     moments, pdf_export, empirical_avg_gain,
                     empirical_outage_gain, loss_ratio)

logger = logging.getLogger(__name__)

exit_ok = 0
exit_config = 2
exit_capacity = 3
exit_numerical = 4

default_gain_psi = 8

fast_selector_note = ('Gains use the fast (ISSA) selector for both the best '
                      'state and the single state rate; exhaustive search is '
                      'infeasible at this scale. The bias is bounded by the '
                      'loss-ratio experiment.')


##-------------------------------------------------------------------------
## Argument parsing
##-------------------------------------------------------------------------
def parse_psi(text):
    '''Parse "1..8", "1,2,4" or "4" into a sorted list of state counts.'''
    try:
        if '..' in text:
            first, last = text.split('..')
            values = list(range(int(first), int(last) + 1))
        else:
            values = [int(v) for v in text.split(',') if v.strip() != '']
    except ValueError:
        raise argparse.ArgumentTypeError(f'Cannot parse psi "{text}"')
    if len(values) == 0 or min(values) < 1:
        raise argparse.ArgumentTypeError(f'psi values must be >= 1: "{text}"')
    return sorted(set(values))


def parse_floats(text):
    try:
        return [float(v) for v in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f'Cannot parse "{text}" as numbers')


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None,
                        help='JSON or YAML config file (flat key/value)')
    common.add_argument('--seed', type=int, default=None)
    common.add_argument('--trials', type=int, default=None)
    common.add_argument('--psi', type=parse_psi, default=None,
                        help='State counts: "1..8", "1,2,4" or "4"')
    common.add_argument('--rho-db', dest='rho_db', type=parse_floats,
                        default=None,
                        help='Transmit SNR in dB (a list for loss-ratio)')
    common.add_argument('--out', type=str, default=None,
                        help='Output directory (CSV goes to stdout if unset)')
    common.add_argument('--workers', type=int, default=1)
    common.add_argument('--selector', choices=['fast', 'exhaustive'],
                        default='fast')
    common.add_argument('--state-rule', dest='state_rule',
                        choices=['max', 'determinant'], default='max',
                        help='How the fast selector picks the best state')
    common.add_argument('--timing', action='store_true',
                        help='Record the runtime in the JSON report')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')

    parser = argparse.ArgumentParser(
                prog='rams',
                description='Reconfigurable antenna mmWave MIMO simulator')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('pdf', parents=[common],
                       help='Single state rate histogram and Gaussian fit')
    p.add_argument('--bins', type=int, default=50)

    sub.add_parser('gain-avg', parents=[common],
                   help='Empirical and analytic average throughput gain')

    p = sub.add_parser('gain-outage', parents=[common],
                       help='Empirical and analytic outage throughput gain')
    p.add_argument('--eps', type=parse_floats, default=[0.01, 0.05, 0.1])

    sub.add_parser('loss-ratio', parents=[common],
                   help='Fast selection loss versus exhaustive search')

    p = sub.add_parser('analytic', parents=[common],
                       help='Evaluate the gain formulas for a rate model')
    p.add_argument('--mu', type=float, required=True)
    p.add_argument('--var', type=float, required=True)
    p.add_argument('--eps', type=parse_floats, default=None)
    p.add_argument('--target', type=float, default=None,
                   help='Report the fewest states reaching this gain')

    p = sub.add_parser('dump-channels', parents=[common],
                       help='Write the channel matrices of one trial')
    p.add_argument('--trial', type=int, default=0)
    return parser


def load_config(args):
    '''Config file values overridden by command line flags.'''
    overrides = {'seed': args.seed,
                 'trials': args.trials,
                 'rho_db': None if args.rho_db is None else args.rho_db[0],
                 'psi': None if args.psi is None else max(args.psi)}
    if args.config is not None:
        return SystemConfig.read(args.config, **overrides)
    return SystemConfig(**{k: v for k, v in overrides.items()
                           if v is not None})


def gain_states(args, cfg):
    '''State counts of a gain sweep (1..8 unless --psi is given) and the
    config carrying the largest of them.
    '''
    if args.psi is not None:
        return args.psi, cfg
    psi_list = list(range(1, default_gain_psi + 1))
    return psi_list, cfg.replace(psi=default_gain_psi)


##-------------------------------------------------------------------------
## Output
##-------------------------------------------------------------------------
def emit(args, table, report, extra=None):
    '''Write <command>.csv and <command>.json to --out, or the CSV to
    stdout.
    '''
    if args.out is None:
        if table is not None:
            table.write(sys.stdout, format='ascii.csv')
        else:
            sys.stdout.write(report.to_json() + '\n')
        return
    out = Path(args.out).expanduser().absolute()
    out.mkdir(parents=True, exist_ok=True)
    if table is not None:
        table.write(out / f'{args.command}.csv', format='ascii.csv',
                    overwrite=True)
    report.write(out / f'{args.command}.json')
    for name, t in (extra or {}).items():
        t.write(out / name, format='ascii.csv', overwrite=True)
    logger.info(f'Wrote {args.command} results to {out}')


def selectors_for(selector):
    '''The exhaustive selector is always simulated alongside the fast one.'''
    return ('fast', 'exhaustive') if selector == 'exhaustive' else ('fast',)


def masked(values):
    '''Column with undefined (None) entries masked.'''
    mask = [v is None for v in values]
    data = [np.nan if v is None else v for v in values]
    return MaskedColumn(data, mask=mask)


def feedback_counts(cfg, psi_list):
    '''Exhaustive search space and feedback bits for each state count.'''
    counts = []
    for psi in psi_list:
        at_psi = cfg.replace(psi=psi)
        counts.append({'psi': psi,
                       'search_space_size': search_space_size(at_psi),
                       'feedback_bits': feedback_bits(at_psi)})
    return counts


##-------------------------------------------------------------------------
## Subcommands
##-------------------------------------------------------------------------
def run_pdf(args):
    cfg = load_config(args)
    table = simulate(cfg, selectors=selectors_for(args.selector), psi_max=1,
                     workers=args.workers)
    samples = table.samples(args.selector, psi=1)
    model = fit_rate_model(samples)
    curve = pdf_export(samples, bins=args.bins)
    results = {'selector': args.selector,
               'model': model.to_dict(),
               'moments': moments(samples)}
    report = ExperimentReport(args.command, cfg, results)
    return curve, report, {'pdf_samples.csv': table.samples_table(args.selector)}


def run_gain_avg(args):
    cfg = load_config(args)
    psi_list, cfg = gain_states(args, cfg)
    table = simulate(cfg, selectors=selectors_for(args.selector),
                     psi_max=max(psi_list), workers=args.workers)
    gains = empirical_avg_gain(cfg, args.selector, psi_list, table=table,
                               state_rule=args.state_rule)
    model = fit_rate_model(table.samples(args.selector, psi=1))
    rows = {'psi': [], 'empirical': [], 'integral': [], 'small': [],
            'large': []}
    for psi in psi_list:
        rows['psi'].append(psi)
        rows['empirical'].append(gains[psi])
        rows['integral'].append(avg_gain_integral(model, psi))
        rows['small'].append(avg_gain_small(model, psi) if psi <= 5 else None)
        rows['large'].append(avg_gain_large(model, psi) if psi >= 2 else None)
    curve = Table([rows['psi'], rows['empirical'], rows['integral'],
                   masked(rows['small']), masked(rows['large'])],
                  names=['psi', 'empirical', 'integral', 'small', 'large'])
    results = {'selector': args.selector,
               'state_rule': args.state_rule,
               'model': model.to_dict(),
               'gains': [{k: rows[k][i] for k in rows}
                         for i in range(len(psi_list))],
               'feedback': feedback_counts(cfg, psi_list)}
    notes = [fast_selector_note] if args.selector == 'fast' else []
    return curve, ExperimentReport(args.command, cfg, results, notes), None


def run_gain_outage(args):
    cfg = load_config(args)
    psi_list, cfg = gain_states(args, cfg)
    table = simulate(cfg, selectors=selectors_for(args.selector),
                     psi_max=max(psi_list), workers=args.workers)
    model = fit_rate_model(table.samples(args.selector, psi=1))
    rows = []
    for eps in args.eps:
        gains = empirical_outage_gain(cfg, args.selector, psi_list, eps,
                                      table=table, state_rule=args.state_rule)
        for psi in psi_list:
            rows.append({'eps': eps, 'psi': psi, 'empirical': gains[psi],
                         'analytic': outage_gain(model, psi, eps)})
    curve = Table(rows=[[r['eps'], r['psi'], r['empirical'], r['analytic']]
                        for r in rows],
                  names=['eps', 'psi', 'empirical', 'analytic'])
    results = {'selector': args.selector,
               'state_rule': args.state_rule,
               'model': model.to_dict(),
               'gains': rows}
    notes = [fast_selector_note] if args.selector == 'fast' else []
    return curve, ExperimentReport(args.command, cfg, results, notes), None


def run_loss_ratio(args):
    cfg = load_config(args)
    psi_list = args.psi or list(range(1, cfg.psi + 1))
    rho_list = args.rho_db or [float(cfg.rho_db)]
    rows = []
    for rho_db in rho_list:
        at_rho = cfg.replace(rho_db=rho_db)
        table = simulate(at_rho, selectors=('fast', 'exhaustive'),
                         psi_max=max(psi_list), workers=args.workers)
        ratios = loss_ratio(at_rho, psi_list, table=table)
        beam_only = loss_ratio(at_rho, psi_list, table=table,
                               state_rule='max')
        for psi in psi_list:
            rows.append({'rho_db': rho_db, 'psi': psi,
                         'loss_ratio': ratios[psi],
                         'beam_loss_ratio': beam_only[psi],
                         'mean_exhaustive':
                            float(table.best('exhaustive', psi).mean()),
                         'mean_fast':
                            float(table.best('fast', psi,
                                             'determinant').mean())})
    names = ['rho_db', 'psi', 'loss_ratio', 'beam_loss_ratio',
             'mean_exhaustive', 'mean_fast']
    curve = Table(rows=[[r[name] for name in names] for r in rows],
                  names=names)
    results = {'rho_db': rho_list,
               'ratios': rows,
               'feedback': feedback_counts(cfg, psi_list)}
    return curve, ExperimentReport(args.command, cfg, results), None


def run_analytic(args):
    model = GaussianRateModel(args.mu, args.var)
    psi_list = args.psi or [1]
    names = ['psi', 'avg_gain_integral', 'avg_gain_small', 'avg_gain_large',
             'avg_gain_asymptotic']
    columns = {name: [] for name in names}
    outage = {}
    for psi in psi_list:
        columns['psi'].append(psi)
        columns['avg_gain_integral'].append(avg_gain_integral(model, psi))
        columns['avg_gain_small'].append(
                avg_gain_small(model, psi) if psi <= 5 else None)
        columns['avg_gain_large'].append(
                avg_gain_large(model, psi) if psi >= 2 else None)
        columns['avg_gain_asymptotic'].append(
                avg_gain_asymptotic(model, psi) if psi >= 2 else None)
        for eps in args.eps or []:
            key = f'outage_gain_eps{eps:g}'
            outage.setdefault(key, []).append(outage_gain(model, psi, eps))
            key = f'outage_gain_asymptotic_eps{eps:g}'
            outage.setdefault(key, []).append(
                    outage_gain_asymptotic(model, psi, eps) if psi >= 2
                    else None)
    columns.update(outage)
    curve = Table([masked(values) if None in values else values
                   for values in columns.values()], names=list(columns))
    results = {'model': model.to_dict(),
               'rows': [{k: v[i] for k, v in columns.items()}
                        for i in range(len(psi_list))]}
    if args.target is not None:
        needed = {'avg': states_for_target_gain(model, args.target)}
        for eps in args.eps or []:
            needed[f'outage_eps{eps:g}'] = states_for_target_gain(
                        model, args.target, eps=eps)
        results['target_gain'] = args.target
        results['states_for_target'] = needed
    return curve, ExperimentReport(args.command, None, results), None


def run_dump_channels(args):
    cfg = load_config(args)
    channels = realize_channels(cfg, args.trial)
    if args.out is None:
        sys.stdout.write(channels.to_json(cfg=cfg) + '\n')
    else:
        out = Path(args.out).expanduser().absolute()
        out.mkdir(parents=True, exist_ok=True)
        channels.write(out / f'{args.command}.json', cfg=cfg)
        logger.info(f'Wrote {channels} to {out}')
    return None, None, None


commands = {'pdf': run_pdf,
            'gain-avg': run_gain_avg,
            'gain-outage': run_gain_outage,
            'loss-ratio': run_loss_ratio,
            'analytic': run_analytic,
            'dump-channels': run_dump_channels,
            }


##-------------------------------------------------------------------------
## main
##-------------------------------------------------------------------------
def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.rho_db is not None and len(args.rho_db) > 1 \
            and args.command != 'loss-ratio':
        parser.error(f'{args.command} takes a single --rho-db value')

    level = logging.INFO if args.verbose else \
            logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level,
                        format='%(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)

    start = time.perf_counter()
    try:
        table, report, extra = commands[args.command](args)
        if report is not None:
            if args.timing:
                report.runtime = time.perf_counter() - start
            emit(args, table, report, extra=extra)
    except (SystemConfigError, SimLabError, ChannelError, BeamspaceError,
            FileNotFoundError, yaml.YAMLError) as e:
        logger.error(f'{e}')
        return exit_config
    except CapacityError as e:
        logger.error(f'{e}')
        return exit_capacity
    except (NumericsError, AnalysisError) as e:
        logger.error(f'{e}')
        return exit_numerical
    return exit_ok


run = main


if __name__ == '__main__':
    sys.exit(main())
