# edgebench/threshold_parser.py

import logging

import ply.yacc as yacc

from edgebench.canny import ThresholdPair
from edgebench.exceptions import ThresholdLexerError, ThresholdSpecError, ThresholdSyntaxError
from edgebench.threshold_lexer import ThresholdLexer

logger = logging.getLogger(__name__)

class ThresholdParser:
    """
    Parses a list of hysteresis pairs into ThresholdPair objects.

    Both the CLI form 'low:high,low:high' and the bracketed form
    '[low,high],[low,high]' are accepted, and may be mixed.
    """
    def __init__(self):
        self.lexer = ThresholdLexer()
        self.lexer.build()
        self.tokens = self.lexer.tokens
        self.parser = yacc.yacc(module=self, write_tables=False, debug=False)

    def p_pairs_single(self, p):
        '''pairs : pair'''
        p[0] = [p[1]]

    def p_pairs_many(self, p):
        '''pairs : pairs COMMA pair'''
        p[0] = p[1] + [p[3]]

    def p_pair(self, p):
        '''pair : NUMBER COLON NUMBER
                | LBRACKET NUMBER COMMA NUMBER RBRACKET'''
        low, high = (p[1], p[3]) if len(p) == 4 else (p[2], p[4])
        try:
            p[0] = ThresholdPair(low, high)
        except ValueError as e:
            raise ThresholdSpecError(str(e))

    def p_error(self, p):
        if p:
            raise ThresholdSyntaxError(f"Unexpected '{p.value}'", p.lexpos, p.value)
        else:
            raise ThresholdSyntaxError("Unexpected end of threshold list", None, None)

    def parse(self, data):
        try:
            return self.parser.parse(data, lexer=self.lexer.lexer)
        except ThresholdLexerError as e:
            logger.error(f"Lexer error at position {e.position}: {e.message}")
            logger.error(f"Context:\n{self._get_error_context(data, e.position)}")
            raise
        except ThresholdSyntaxError as e:
            if e.position is not None:
                logger.error(f"Syntax error at position {e.position}: {e.message}")
                logger.error(f"Context:\n{self._get_error_context(data, e.position)}")
            else:
                logger.error(f"Syntax error: {e.message}")
            raise

    def _get_error_context(self, data, position, context_length=20):
        start = max(0, position - context_length)
        end = min(len(data), position + context_length)
        context = data[start:end]
        pointer = ' ' * (position - start) + '^'
        return f"{context}\n{pointer}"


def parse_thresholds(text):
    """Parse a threshold list; an empty string is a syntax error."""
    if not text or not text.strip():
        raise ThresholdSyntaxError("Empty threshold list", None, None)
    return ThresholdParser().parse(text)


def format_thresholds(pairs):
    return ','.join(f"{p.low:g}:{p.high:g}" for p in pairs)
