"""
論理式の ASCII 文法パーサ（lark の LALR パーサ）

    1  0  q*phi  (q)*phi  phi + psi  phi \\/ psi  phi /\\ psi  <label>phi  <>phi
    ~phi  phi . psi  phi (-) q  phi (+) psi  mu v. phi  nu v. phi  prop(name)  pos phi

結合の強さ（弱い順）: \\/ < /\\ < + と (+) < . と (-) < 前置演算子 < 原子式。
二項演算子は左結合。mu / nu の本体は右端まで伸びる（LALR の shift 優先で解決）。
数だけの原子式 q は q*1 を表す（0 と 1 はそれぞれ Zero, One）。
"""

import logging
from fractions import Fraction
from typing import Optional

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError

from common.errors import FormulaSyntaxError, ModelFormatError
from common.utils import parse_rational
from backend.formula import (Diamond, Formula, Join, LogicKind, Meet, Minus, Mu, Neg, Nu, One,
                             OPlus, Plus, PosPart, Prod, Prop, Scale, Var, Zero, validate_kind)

logger = logging.getLogger(__name__)

FORMULA_GRAMMAR = r"""
    ?start: join

    ?join: meet
         | join "\\/" meet              -> disjunction
    ?meet: sum
         | meet "/\\" sum               -> conjunction
    ?sum: product
        | sum "+" product               -> plus
        | sum "(+)" product             -> oplus
    ?product: unary
            | product "." unary         -> prod
            | product "(-)" NUMBER      -> minus
    ?unary: NUMBER "*" unary            -> scale
          | SCALAR unary                -> scale
          | "~" unary                   -> neg
          | DIAMOND unary               -> diamond
          | "pos" unary                 -> pos
          | "mu" NAME "." join          -> mu
          | "nu" NAME "." join          -> nu
          | atom
    ?atom: NUMBER                       -> constant
         | "prop" "(" NAME ")"          -> prop
         | NAME                         -> var
         | "(" join ")"

    SCALAR.2: /\(\s*-?\d+(?:\.\d+)?(?:\/\d+)?\s*\)\s*\*/
    DIAMOND: /<[A-Za-z_][\w']*>|<>/
    NUMBER: /-?\d+(?:\.\d+)?(?:\/\d+)?/
    NAME: /[A-Za-z_][\w']*/

    %import common.WS
    %ignore WS
"""

_PARSER = Lark(FORMULA_GRAMMAR, parser="lalr")

END_OF_INPUT = "$END"


def _rational(token: Token, text: Optional[str] = None) -> Fraction:
    try:
        return parse_rational(text if text is not None else str(token))
    except (ModelFormatError, ZeroDivisionError) as exc:
        raise FormulaSyntaxError(f"数として解釈できません {token.value!r}", token.start_pos) from exc


@v_args(inline=True)
class FormulaBuilder(Transformer):
    """構文木を Formula に変換する"""

    def disjunction(self, left: Formula, right: Formula) -> Formula:
        return Join(left, right)

    def conjunction(self, left: Formula, right: Formula) -> Formula:
        return Meet(left, right)

    def plus(self, left: Formula, right: Formula) -> Formula:
        return Plus(left, right)

    def oplus(self, left: Formula, right: Formula) -> Formula:
        return OPlus(left, right)

    def prod(self, left: Formula, right: Formula) -> Formula:
        return Prod(left, right)

    def minus(self, body: Formula, number: Token) -> Formula:
        return Minus(body, _rational(number))

    def scale(self, scalar: Token, body: Formula) -> Formula:
        if scalar.type == "SCALAR":
            return Scale(_rational(scalar, scalar.value.strip("()* \t\r\n")), body)
        return Scale(_rational(scalar), body)

    def neg(self, body: Formula) -> Formula:
        return Neg(body)

    def diamond(self, label: Token, body: Formula) -> Formula:
        return Diamond(label.value[1:-1] or None, body)

    def pos(self, body: Formula) -> Formula:
        return PosPart(body)

    def mu(self, var: Token, body: Formula) -> Formula:
        return Mu(str(var), body)

    def nu(self, var: Token, body: Formula) -> Formula:
        return Nu(str(var), body)

    def constant(self, number: Token) -> Formula:
        q = _rational(number)
        if q == 1:
            return One()
        if q == 0:
            return Zero()
        return Scale(q, One())

    def prop(self, name: Token) -> Formula:
        return Prop(str(name))

    def var(self, name: Token) -> Formula:
        return Var(str(name))


def _describe(terminal: str) -> str:
    if terminal == END_OF_INPUT:
        return "入力の終わり"
    try:
        pattern = _PARSER.get_terminal(terminal).pattern
    except KeyError:
        return terminal
    return pattern.value if pattern.type == "str" else terminal


def _syntax_error(text: str, exc: UnexpectedInput) -> FormulaSyntaxError:
    """lark の例外を位置付きの FormulaSyntaxError に変換する"""
    if isinstance(exc, UnexpectedCharacters):
        return FormulaSyntaxError(f"不正な文字 {exc.char!r}", exc.pos_in_stream)
    if isinstance(exc, UnexpectedToken):
        token = exc.token
        at_end = token.type == END_OF_INPUT
        found = "入力の終わり" if at_end else repr(token.value)
        position = len(text) if at_end else token.start_pos
        if not at_end and END_OF_INPUT in exc.expected:
            return FormulaSyntaxError(f"余分な入力 {found}", position)
        wanted = " / ".join(sorted(_describe(name) for name in exc.expected))
        return FormulaSyntaxError(f"{wanted} のいずれかが必要ですが {found} があります", position)
    position = exc.pos_in_stream if exc.pos_in_stream is not None else len(text)
    return FormulaSyntaxError(f"構文エラー: {exc}", position)


def parse_formula(text: str, kind: Optional[LogicKind] = LogicKind.R) -> Formula:
    """
    文字列を論理式に変換する

    Args:
        text: ASCII 文法の式
        kind: 論理の種類。None なら種類の検査を行わない

    Raises:
        FormulaSyntaxError: 構文エラー（position に位置）
        LogicKindError: kind で許可されない構成子・スカラー
    """
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as exc:
        raise _syntax_error(text, exc) from None
    try:
        phi = FormulaBuilder().transform(tree)
    except VisitError as exc:
        raise exc.orig_exc from None
    if kind is not None:
        validate_kind(phi, LogicKind(kind))
    logger.debug(f"[parse_formula] {text!r} → {phi}")
    return phi
