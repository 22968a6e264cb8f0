# src/cli.py - Command line entry point (cdma-sim)
import logging
from functools import wraps

import click

from src.complexity import complexity_table, ordering_report
from src.config import DEFAULT_USER_SWEEP_SNR, SystemConfig, snr_db_to_noise_var
from src.exceptions import SimulationError
from src.harness import parse_config, run_sweep, write_results
from src.log_config import setup_logging
from src.relay_selection import audit_proposition, make_scenario_generator

logger = logging.getLogger(__name__)


def _floats(text):
    return tuple(float(v) for v in text.split(',')) if text else None


def _words(text):
    return tuple(v.strip() for v in text.split(',') if v.strip()) if text else None


def _m_grid(text):
    if ':' in text:
        low, high = (int(v) for v in text.split(':'))
        return list(range(low, high + 1))
    return [int(v) for v in text.split(',')]


def _handle_errors(func):
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except SimulationError as e:
            raise click.ClickException(str(e)) from e
    return wrapper


def _emit(table, out, fmt, config=None):
    if out:
        write_results(table, out, fmt, config)
        click.echo(f"💾 Wrote {len(table)} rows to {out}")
    else:
        click.echo(table.to_string(index=False))


def sweep_options(func):
    options = [
        click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), help='JSON config file.'),
        click.option('--detector', help='Comma-separated detector names.'),
        click.option('--selection', help='Comma-separated selections: none, standard, proposed, exhaustive.'),
        click.option('--relays', type=int, help='Number of relays L.'),
        click.option('--dth', type=float, help='Reliability threshold d_th.'),
        click.option('--group-n', type=int, help='GL-SIC group size n.'),
        click.option('--nq', type=int, help='GL-PIC re-examined users n_q.'),
        click.option('--branches', type=int, help='GL-SIC-MB branch count L_b.'),
        click.option('--trials', type=int, help='Packets per axis point.'),
        click.option('--packet', type=int, help='Symbols per packet P.'),
        click.option('--seed', type=int, help='Root RNG seed.'),
        click.option('--scale', type=click.Choice(['desk', 'full']), default='desk', show_default=True),
        click.option('--mode', type=click.Choice(['cooperative', 'direct']), help='direct runs without relays.'),
        click.option('--workers', type=int, default=1, show_default=True, help='Parallel trial workers.'),
        click.option('--out', type=click.Path(dir_okay=False), help='Output file; prints to stdout if omitted.'),
        click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv', show_default=True),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _overrides(detector, selection, relays, dth, group_n, nq, branches, trials, packet, seed, mode):
    return {
        'detectors': _words(detector),
        'selections': _words(selection),
        'L': relays,
        'd_th': dth,
        'n': group_n,
        'n_q': nq,
        'L_b': branches,
        'trials': trials,
        'P': packet,
        'seed': seed,
        'mode': mode,
    }


@click.group()
@click.option('--log-json', is_flag=True, help='Emit JSON log lines.')
@click.option('-v', '--verbose', is_flag=True, help='Debug logging.')
def cli(log_json, verbose):
    """Cooperative DS-CDMA detection and relay selection simulator."""
    setup_logging(logging.DEBUG if verbose else logging.INFO, json_format=log_json)


@cli.command('ber-sweep')
@sweep_options
@click.option('--snr', help='Comma-separated SNR points in dB.')
@click.option('--users', type=int, help='Number of users K.')
@_handle_errors
def ber_sweep(config_path, detector, selection, relays, dth, group_n, nq, branches, trials, packet,
              seed, scale, mode, workers, out, fmt, snr, users):
    """BER versus SNR."""
    overrides = _overrides(detector, selection, relays, dth, group_n, nq, branches, trials, packet, seed, mode)
    overrides.update({'K': users, 'axis_name': 'snr_db', 'axis_values': _floats(snr), 'scenario_id': 'ber-sweep'})
    config, spec = parse_config(config_path, overrides, scale=scale)
    table = run_sweep(spec, workers=workers, progress=True)
    _emit(table, out, fmt, {**config.to_dict(), **spec.to_dict()})


@cli.command('user-sweep')
@sweep_options
@click.option('--users', help='Comma-separated user counts.')
@click.option('--snr', type=float, default=DEFAULT_USER_SWEEP_SNR, show_default=True, help='Fixed SNR in dB.')
@_handle_errors
def user_sweep(config_path, detector, selection, relays, dth, group_n, nq, branches, trials, packet,
               seed, scale, mode, workers, out, fmt, users, snr):
    """BER versus number of users at a fixed SNR."""
    overrides = _overrides(detector, selection, relays, dth, group_n, nq, branches, trials, packet, seed, mode)
    counts = _floats(users) or (2, 4, 6, 8, 10, 12, 14, 16)
    overrides.update({
        'axis_name': 'users', 'axis_values': counts, 'snr_db': snr,
        'noise_var': snr_db_to_noise_var(snr), 'scenario_id': 'user-sweep',
        'K': int(max(counts)),
    })
    config, spec = parse_config(config_path, overrides, scale=scale)
    table = run_sweep(spec, workers=workers, progress=True)
    _emit(table, out, fmt, {**config.to_dict(), **spec.to_dict()})


@cli.command('complexity')
@click.option('--m-grid', default='34:100', show_default=True, help='M values as low:high or a list.')
@click.option('--users', type=int, default=10, show_default=True)
@click.option('--paths', type=int, default=3, show_default=True, help='Number of paths L_p.')
@click.option('--group-n', type=int, default=2, show_default=True)
@click.option('--nq', type=int, default=3, show_default=True)
@click.option('--constellation-size', type=int, default=2, show_default=True)
@click.option('--check-ordering', is_flag=True, help='Print the per-M ordering check instead.')
@click.option('--out', type=click.Path(dir_okay=False))
@_handle_errors
def complexity(m_grid, users, paths, group_n, nq, constellation_size, check_ordering, out):
    """Worst-case flop counts per detector."""
    table = complexity_table(_m_grid(m_grid), K=users, L_p=paths, N_c=constellation_size, n=group_n, n_q=nq)
    if check_ordering:
        table = ordering_report(table)
    if out:
        table.to_csv(out, index=False)
        click.echo(f"💾 Wrote {len(table)} rows to {out}")
    else:
        click.echo(table.to_string(index=False))


@cli.command('audit-proposition')
@click.option('--trials', type=int, default=1000, show_default=True)
@click.option('--relays', type=int, default=5, show_default=True)
@click.option('--users', type=int, default=4, show_default=True)
@click.option('--spreading', type=int, default=16, show_default=True, help='Spreading gain N.')
@click.option('--snr', type=float, default=10.0, show_default=True)
@click.option('--seed', type=int, default=2024, show_default=True)
@click.option('--relay-only', is_flag=True, help='Score sets without the direct link.')
@click.option('--out', type=click.Path(dir_okay=False))
@_handle_errors
def audit(trials, relays, users, spreading, snr, seed, relay_only, out):
    """Empirical check of standard <= proposed <= exhaustive set SINR."""
    config = SystemConfig.for_users(K=users, L=relays, N=spreading,
                                    noise_var=snr_db_to_noise_var(snr), seed=seed, include_direct=not relay_only)
    result = audit_proposition(trials, make_scenario_generator(config), include_direct=config.include_direct)
    for key, value in result.summary().items():
        click.echo(f"{key}: {value}")
    if out:
        result.table.to_csv(out, index=False)
        click.echo(f"💾 Wrote audit table to {out}")
    if result.upper_violations:
        raise click.ClickException("Proposed greedy exceeded the exhaustive optimum")
    if result.max_proposed_evaluations > relays * (relays + 1) // 2:
        raise click.ClickException("Proposed greedy evaluated more sets than L(L+1)/2")


def main():
    cli()


if __name__ == "__main__":
    main()
