import argparse
import json
import logging as std_logging
import sys
from pathlib import Path

from transformers.utils import logging

from synforge.errors import (AstError, CheckpointError, ConfigError, DataError, GrammarError, OracleError,
                             SynforgeError, TrainingError, TransitionError)

EXIT_USAGE = 1
EXIT_DATA = 2
ERROR_CODES = [
    (ConfigError, 'config', EXIT_USAGE),
    (GrammarError, 'grammar', EXIT_DATA),
    (AstError, 'ast', EXIT_DATA),
    (OracleError, 'oracle', EXIT_DATA),
    (TransitionError, 'transition', EXIT_DATA),
    (DataError, 'data', EXIT_DATA),
    (CheckpointError, 'checkpoint', EXIT_DATA),
    (TrainingError, 'training', EXIT_DATA),
]


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        raise UsageError(message)


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid int value: '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def get_args(argv=None):
    parser = ArgumentParser(prog='synforge', description='Grammar-constrained code generation')
    parser.add_argument('--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p, grammar=True, data=True):
        if grammar:
            p.add_argument('--grammar', type=str, default=None, help='grammar file (bundled one if omitted)')
            p.add_argument('--language', type=str, default=None, choices=['minipy', 'flowdsl'])
        if data:
            p.add_argument('--data', type=str, required=True, help='JSON-lines {id, nl, code}')
        p.add_argument('--out', type=str, default=None)
        p.add_argument('--seed', type=int, default=None)
        return p

    p = common(sub.add_parser('induce-grammar', help='induce a grammar from parsed code'), grammar=False)
    p.add_argument('--language', type=str, default='minipy', choices=['minipy', 'flowdsl'])

    p = common(sub.add_parser('closure', help='add unary closure productions'))
    p.add_argument('--closure-k', type=int, required=True)

    p = common(sub.add_parser('oracle', help='write oracle action sequences'))
    p.add_argument('--closure-k', type=int, default=0)
    p.add_argument('--config', type=str, default=None)

    p = common(sub.add_parser('stats', help='grammar and oracle statistics'))
    p.add_argument('--closure-k', type=int, default=0)

    p = common(sub.add_parser('train', help='train a model'), data=False)
    p.add_argument('--config', type=str, default=None)
    p.add_argument('--data', type=str, default=None)
    p.add_argument('--dev', type=str, default=None)
    p.add_argument('--dropout', type=float, default=None)
    p.add_argument('--closure-k', type=int, default=None)
    p.add_argument('--sweep-dropout', action='store_true',
                   help='train one model per dropout rate in {0, 0.2, 0.3, 0.4} and keep the best on --dev')
    p.add_argument('overrides', nargs='*', help='dotlist overrides, e.g. train.lr=0.0005')

    p = common(sub.add_parser('decode', help='decode descriptions with a checkpoint'), data=False)
    p.add_argument('--model', type=str, required=True)
    p.add_argument('--input', type=str, required=True)
    p.add_argument('--beam', type=positive_int, default=15)
    p.add_argument('--max-steps', type=positive_int, default=300)
    p.add_argument('--n-best', type=positive_int, default=1)
    p.add_argument('--length-norm', action='store_true')

    p = common(sub.add_parser('eval', help='score predictions against gold code'))
    p.add_argument('--pred', type=str, nargs='+', required=True, help='one predictions file per run')

    p = common(sub.add_parser('gradcheck', help='finite-difference gradient check'), grammar=False, data=False)
    p.add_argument('--samples', type=positive_int, default=6)
    p.add_argument('--tolerance', type=float, default=1e-4)

    common(sub.add_parser('fixtures', help='write the seeded fixture corpora'), grammar=False, data=False)
    return parser.parse_args(argv)


def setup_logging(verbose: bool):
    logging.set_verbosity(std_logging.DEBUG if verbose else std_logging.INFO)
    logging.enable_default_handler()
    logging.enable_explicit_format()


def write_output(path, text: str):
    if path is None:
        sys.stdout.write(text if text.endswith('\n') else text + '\n')
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)


def language_of(args) -> str:
    return getattr(args, 'language', None) or 'minipy'


def grammar_for(args):
    from synforge.grammar.grammar import load_grammar_file
    from synforge.lang import language_grammar
    return load_grammar_file(args.grammar) if args.grammar else language_grammar(language_of(args))


def cmd_induce_grammar(args):
    from synforge.data.canonicalize import abstract_strings, canonicalize
    from synforge.data.dataset import read_jsonl
    from synforge.grammar.induction import induce_grammar
    from synforge.lang import parse

    trees = []
    for ix, record in read_jsonl(args.data):
        if 'nl' not in record or 'code' not in record:
            raise DataError('missing field(s) nl/code', index=ix)
        _, table = canonicalize(record['nl'])
        try:
            trees.append(parse(abstract_strings(record['code'], table), args.language))
        except AstError as e:
            raise DataError(f'code does not parse: {e}', index=ix) from None
    if not trees:
        raise DataError(f'no examples in {args.data}')
    write_output(args.out, induce_grammar(trees, trees[0].type).to_text())


def load_corpus(args, grammar):
    from synforge.data.dataset import load_dataset
    corpus = load_dataset(args.data, grammar, language_of(args))
    if not corpus:
        raise DataError(f'no derivable examples in {args.data}')
    return corpus


def cmd_closure(args):
    from training.dataloader import close_grammar
    grammar = grammar_for(args)
    if args.closure_k < 1:
        raise ConfigError('--closure-k must be >= 1')
    write_output(args.out, close_grammar(load_corpus(args, grammar), grammar, args.closure_k).to_text())


def cmd_oracle(args):
    from synforge.data.vocab import build_vocab
    from synforge.transition.actions import dump_actions
    from synforge.transition.system import frontier_trace
    from training.config import load_config
    from training.dataloader import close_grammar, oracle_corpus

    config = load_config(args.config)
    grammar = grammar_for(args)
    corpus = load_corpus(args, grammar)
    grammar = close_grammar(corpus, grammar, args.closure_k)
    vocab = build_vocab(corpus, config.data.src_freq_cutoff, config.data.terminal_freq_cutoff)
    lines = []
    for example, actions in zip(corpus, oracle_corpus(corpus, grammar, vocab)):
        _, parents = frontier_trace(actions, grammar)
        records = [json.loads(line) for line in dump_actions(actions, parents).splitlines()]
        lines.append(json.dumps({'id': example.id, 'actions': records}, ensure_ascii=False))
    write_output(args.out, '\n'.join(lines) + '\n')


def cmd_stats(args):
    from synforge.grammar.induction import grammar_stats
    from training.dataloader import close_grammar

    grammar = grammar_for(args)
    corpus = load_corpus(args, grammar)
    if args.closure_k:
        grammar = close_grammar(corpus, grammar, args.closure_k)
    stats = grammar_stats(grammar, [e.ast for e in corpus])
    rows = [
        ('Examples', stats.n_examples),
        ('Productions', stats.production_count),
        ('  of which closures', stats.closure_count),
        ('Node types', stats.node_type_count),
        ('Avg. # actions per example', f'{stats.avg_actions:.2f}'),
        ('Max. # actions per example', stats.max_actions),
    ]
    text = '\n'.join(f'{name:<30}{value}' for name, value in rows)
    if args.out:
        write_output(args.out, json.dumps(stats.to_dict(), indent=2) + '\n')
    print(text)


def cmd_train(args):
    from training.config import load_config
    from training.train import sweep_dropout, train

    overrides = list(args.overrides)
    flags = {
        'data.train_file': args.data, 'data.dev_file': args.dev, 'data.grammar': args.grammar,
        'model.dropout': args.dropout, 'data.closure_k': args.closure_k, 'train.output_dir': args.out,
        'data.language': args.language, 'train.seed': args.seed,
    }
    overrides += [f'{key}={value}' for key, value in flags.items() if value is not None]
    config = load_config(args.config, overrides)
    if args.sweep_dropout:
        if args.dropout is not None:
            raise ConfigError('--dropout and --sweep-dropout are exclusive')
        sweep = sweep_dropout(config)
        result = sweep.best
        summary = {'dropout': sweep.best_dropout, 'dev_accuracy': {str(k): v for k, v in sweep.dev_accuracy.items()}}
    else:
        result = train(config)
        summary = {}
    summary.update({'best_dev_accuracy': result.best_dev_accuracy, 'checkpoint': result.checkpoint_path,
                    'epochs': len(result.epoch_log)})
    print(json.dumps(summary))


def cmd_decode(args):
    from eval.harness import prediction_record
    from synforge.data.canonicalize import canonicalize
    from synforge.data.dataset import read_jsonl
    from synforge.inference import decode_corpus
    from training.checkpoint import checkpoint_info, load_checkpoint

    info = checkpoint_info(args.model)
    language = info['extra'].get('train_config', {}).get('data', {}).get('language', language_of(args))
    given = grammar_for(args) if args.grammar else None
    model, grammar, vocab = load_checkpoint(args.model, grammar=given)
    ids, inputs, tables = [], [], []
    for ix, record in read_jsonl(args.input):
        if 'nl' not in record:
            raise DataError('missing field nl', index=ix)
        tokens, table = canonicalize(record['nl'])
        if not tokens:
            raise DataError('empty description', index=ix)
        ids.append(str(record.get('id', ix)))
        inputs.append(tokens)
        tables.append(table)
    results = decode_corpus(inputs, model, grammar, vocab, args.beam, args.max_steps, show_progress=True,
                            length_norm=args.length_norm)
    lines = [json.dumps(prediction_record(i, r, language, t, args.n_best), ensure_ascii=False)
             for i, r, t in zip(ids, results, tables)]
    write_output(args.out, '\n'.join(lines) + '\n')


def cmd_eval(args):
    from eval.harness import average_reports, evaluate_predictions
    from synforge.data.dataset import read_jsonl

    corpus = load_corpus(args, grammar_for(args))
    reports = [evaluate_predictions(corpus, [record for _, record in read_jsonl(path)]) for path in args.pred]
    report = reports[0] if len(reports) == 1 else {**average_reports(reports), 'runs': reports}
    write_output(args.out, json.dumps(report, indent=2, ensure_ascii=False) + '\n')
    if args.out:
        print(json.dumps({k: v for k, v in report.items() if k not in ('per_example', 'size_buckets', 'runs')}))


def cmd_gradcheck(args):
    from training.gradcheck import run_gradcheck
    report = run_gradcheck(1 if args.seed is None else args.seed, args.samples, args.tolerance)
    write_output(args.out, json.dumps(report.to_dict(), indent=2) + '\n')
    if not report.passed:
        raise TrainingError(f'gradient check failed: max rel err {report.max_rel_err:.3e} > {args.tolerance}')


def cmd_fixtures(args):
    from synforge.data.fixtures import DEFAULT_SEED, write_fixtures
    manifest = write_fixtures(args.out or 'data', DEFAULT_SEED if args.seed is None else args.seed)
    print(json.dumps(manifest['counts'], sort_keys=True))


COMMANDS = {
    'induce-grammar': cmd_induce_grammar,
    'closure': cmd_closure,
    'oracle': cmd_oracle,
    'stats': cmd_stats,
    'train': cmd_train,
    'decode': cmd_decode,
    'eval': cmd_eval,
    'gradcheck': cmd_gradcheck,
    'fixtures': cmd_fixtures,
}


def main(argv=None) -> int:
    try:
        args = get_args(argv)
    except UsageError as e:
        sys.stderr.write(f'E:usage:{e}\n')
        return EXIT_USAGE
    setup_logging(args.verbose)

    from training.utils import apply_thread_cap, set_random_seed
    apply_thread_cap()
    set_random_seed(seed=args.seed or 0)
    try:
        COMMANDS[args.command](args)
    except SynforgeError as e:
        for cls, code, status in ERROR_CODES:
            if isinstance(e, cls):
                sys.stderr.write(f'E:{code}:{e}\n')
                return status
        sys.stderr.write(f'E:error:{e}\n')
        return EXIT_DATA
    except OSError as e:
        sys.stderr.write(f'E:io:{e}\n')
        return EXIT_DATA
    except ValueError as e:
        sys.stderr.write(f'E:data:{e}\n')
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
