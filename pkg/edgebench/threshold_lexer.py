# edgebench/threshold_lexer.py

import ply.lex as lex
from edgebench.exceptions import ThresholdLexerError

class ThresholdLexer:
    """Tokens for threshold lists such as '50:100,50:150' or '[50,100],[50,150]'."""
    tokens = [
        'NUMBER',
        'COLON', 'COMMA',
        'LBRACKET', 'RBRACKET',
    ]

    t_COLON = r':'
    t_COMMA = r','
    t_LBRACKET = r'\['
    t_RBRACKET = r'\]'

    def t_NUMBER(self, t):
        r'\d+(\.\d+)?'
        t.value = float(t.value) if '.' in t.value else int(t.value)
        return t

    t_ignore = ' \t'

    def t_error(self, t):
        raise ThresholdLexerError(f"Illegal character '{t.value[0]}'", t.lexpos)

    def build(self, **kwargs):
        self.lexer = lex.lex(module=self, **kwargs)

    def tokenize(self, data):
        self.lexer.input(data)
        return list(iter(self.lexer.token, None))
