"""Regenerates the frozen oracle fixtures, or with --check verifies that the
committed ones are what the oracles produce today.

  serialization_goldens.jsonl  baseline text per (db_id, question)
  em_corpus.jsonl              (gold, pred) pairs with the official-script EM
"""
import argparse
import json
import pathlib
import random
import re
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))
import picard_serialize  # noqa: E402
import spider_eval  # noqa: E402

ROOT = pathlib.Path(__file__).resolve().parents[1] / 'fixtures'
SPIDER = ROOT / 'spider'
OUT = ROOT / 'oracle'

GOLDEN_DBS = ['concert_singer', 'pets_1', 'car_1', 'flight_2', 'employee_hire_evaluation',
              'course_teach', 'museum_visit', 'poker_player', 'orchestra', 'world_1']


def load():
    tables = {e['db_id']: e for e in json.loads((SPIDER / 'tables.json').read_text())}
    dev = json.loads((SPIDER / 'dev.json').read_text())
    return tables, dev


def serialization_goldens(tables, dev):
    rows = []
    for db in GOLDEN_DBS:
        questions = [ex['question'] for ex in dev if ex['db_id'] == db][:4]
        questions.append('  ' + questions[0] + '  ')
        for q in questions:
            rows.append({'db_id': db, 'question': q, 'text': picard_serialize.serialize(tables[db], q)})
    return rows


def columns_of(entry):
    names = entry['table_names_original']
    out = {}
    for t, c in entry['column_names_original']:
        if t >= 0:
            out.setdefault(names[t].lower(), []).append(c)
    return out


KEYWORD_RE = re.compile(r'\b(SELECT|FROM|WHERE|GROUP BY|ORDER BY|HAVING|LIMIT|JOIN|ON|AS|AND|OR|NOT|IN|'
                        r'DISTINCT|DESC|ASC|INTERSECT|UNION|EXCEPT|LIKE|BETWEEN)\b')


def candidates_for(gold, entry):
    cols = columns_of(entry)
    from_tables = [t.lower() for t in re.findall(r'(?:FROM|JOIN) (\w+)', gold, flags=re.I)]
    return [c for t in from_tables[:1] for c in cols.get(t, [])][1:]


def mutations(gold, entry, rng):
    out = []

    def add(kind, pred):
        if pred != gold or kind in ('identity',):
            out.append((kind, pred))

    add('identity', gold)
    add('lowercase_keywords', KEYWORD_RE.sub(lambda m: m.group(0).lower(), gold))
    if re.search(r'\bT1\b', gold):
        add('alias_rename', re.sub(r'\bT(\d)\b', r'X\1', gold))
    if "'" in gold:
        add('value_change', re.sub(r"'[^']*'", "'zzz'", gold, count=1))
    if ' DESC' in gold:
        add('order_flip', gold.replace(' DESC', ' ASC', 1))
    elif re.search(r'ORDER BY [^ ]+( ASC)?', gold):
        add('order_flip', re.sub(r'(ORDER BY [^ ]+)( ASC)?', r'\1 DESC', gold, count=1))
    m = re.search(r'LIMIT (\d+)', gold)
    if m:
        add('limit_change', gold.replace(m.group(0), 'LIMIT ' + str(int(m.group(1)) + 2), 1))
        add('limit_drop', gold.replace(' ' + m.group(0), '', 1))
    if gold.startswith('SELECT ') and not gold.startswith('SELECT DISTINCT'):
        add('distinct_add', 'SELECT DISTINCT ' + gold[len('SELECT '):])
    for a, b in (('max(', 'min('), ('min(', 'max('), ('avg(', 'sum('), ('sum(', 'avg(')):
        if a in gold.lower():
            i = gold.lower().index(a)
            add('agg_swap', gold[:i] + b + gold[i + len(a):])
            break
    if 'count(*)' in gold.lower() and candidates_for(gold, entry):
        i = gold.lower().index('count(*)')
        add('count_column', gold[:i] + 'count(' + candidates_for(gold, entry)[0] + ')' + gold[i + 8:])
    for a, b in ((' > ', ' < '), (' < ', ' >= '), (' = ', ' != '), (' >= ', ' > ')):
        if a in gold:
            add('op_swap', gold.replace(a, b, 1))
            break
    if ' AND ' in gold and ' BETWEEN ' not in gold:
        add('and_or', gold.replace(' AND ', ' OR ', 1))
    m = re.search(r' ON (\S+) = (\S+)', gold)
    if m:
        add('on_swap', gold.replace(m.group(0), f' ON {m.group(2)} = {m.group(1)}', 1))
    m = re.search(r'FROM (\w+) AS (\w+) JOIN (\w+) AS (\w+) ON (\S+ = \S+)(?= |$)', gold)
    if m and gold.count(' JOIN ') == 1:
        add('join_order', gold.replace(
            m.group(0), f'FROM {m.group(3)} AS {m.group(4)} JOIN {m.group(1)} AS {m.group(2)} ON {m.group(5)}', 1))
    m = re.match(r'SELECT (?!DISTINCT)([^()]+?) , ([^()]+?) FROM ', gold)
    if m and ' , ' not in m.group(2):
        add('select_swap', gold.replace(m.group(0), f'SELECT {m.group(2)} , {m.group(1)} FROM ', 1))
    m = re.search(r' WHERE .*?(?= GROUP BY| ORDER BY| INTERSECT| UNION| EXCEPT|$)', gold)
    if m and '(' not in m.group(0):
        add('where_drop', gold.replace(m.group(0), '', 1))
    if ' NOT IN ' in gold:
        add('not_in', gold.replace(' NOT IN ', ' IN ', 1))
    toks = gold.split(' ')
    add('truncate', ' '.join(toks[:max(2, len(toks) * 2 // 3)]))
    cols = columns_of(entry)
    from_tables = [t.lower() for t in re.findall(r'(?:FROM|JOIN) (\w+)', gold, flags=re.I)]
    candidates = [c for t in from_tables for c in cols.get(t, [])]
    select_part = gold.split(' FROM ')[0]
    plain = [t for t in re.findall(r'\b([A-Za-z_]\w*)\b', select_part)
             if any(t.lower() == c.lower() for c in candidates)]
    if plain and candidates:
        victim = rng.choice(plain)
        other = [c for c in candidates if c.lower() != victim.lower()]
        if other:
            repl = rng.choice(other)
            add('column_swap', re.sub(r'\b' + re.escape(victim) + r'\b', repl, gold, count=1))
    others = [t for t in cols if t not in from_tables]
    if len(from_tables) == 1 and others and ' AS ' not in gold:
        add('table_swap', re.sub(r'FROM \w+', 'FROM ' + rng.choice(sorted(others)), gold, count=1))
    m = re.search(r'GROUP BY (\S+)', gold)
    if m and candidates:
        add('group_change', gold.replace(m.group(0), 'GROUP BY ' + rng.choice(candidates), 1))
    return out


HANDWRITTEN = [
    ('pets_1', 'SELECT count(*) FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid WHERE T1.age > 20',
     'SELECT count(*) FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid WHERE T2.stuid > 20'),
    ('pets_1', 'SELECT T1.stuid FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid',
     'SELECT T2.stuid FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid'),
    ('pets_1', 'SELECT stuid FROM student', 'SELECT stuid FROM has_pet'),
    ('pets_1', 'SELECT avg(age) FROM student WHERE stuid NOT IN (SELECT stuid FROM has_pet)',
     'SELECT avg(age) FROM student WHERE stuid NOT IN (SELECT DISTINCT stuid FROM has_pet)'),
    ('pets_1', 'SELECT avg(age) FROM student WHERE stuid NOT IN (SELECT stuid FROM has_pet)',
     'SELECT avg(age) FROM student WHERE stuid NOT IN (SELECT T2.stuid FROM has_pet AS T2)'),
    ('pets_1', 'SELECT avg(age) FROM student WHERE stuid NOT IN (SELECT stuid FROM has_pet)',
     'SELECT avg(age) FROM student WHERE stuid NOT IN (SELECT petid FROM has_pet)'),
    ('pets_1', 'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T1.stuid HAVING count(*) > 1',
     'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T2.stuid HAVING count(*) > 1'),
    ('pets_1', 'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T1.stuid HAVING count(*) > 1',
     'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T1.stuid HAVING count(*) > 2'),
    ('pets_1', 'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T1.stuid HAVING count(*) > 1',
     'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T1.stuid HAVING count(*) >= 1'),
    ('pets_1', 'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T1.stuid HAVING count(*) > 1',
     'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T1.stuid'),
    ('concert_singer', 'SELECT country FROM singer WHERE age > 40 INTERSECT SELECT country FROM singer WHERE age < 30',
     'SELECT country FROM singer WHERE age > 40 UNION SELECT country FROM singer WHERE age < 30'),
    ('concert_singer', 'SELECT country FROM singer WHERE age > 40 INTERSECT SELECT country FROM singer WHERE age < 30',
     'SELECT country FROM singer WHERE age > 40 INTERSECT SELECT DISTINCT country FROM singer WHERE age < 30'),
    ('concert_singer', 'SELECT country FROM singer WHERE age > 40 INTERSECT SELECT country FROM singer WHERE age < 30',
     'SELECT country FROM singer WHERE age < 30 INTERSECT SELECT country FROM singer WHERE age > 40'),
    ('concert_singer', 'SELECT country FROM singer WHERE age > 40 INTERSECT SELECT country FROM singer WHERE age < 30',
     'SELECT country FROM singer WHERE age > 40 AND age < 30'),
    ('concert_singer', 'SELECT song_name FROM singer WHERE age > (SELECT avg(age) FROM singer)',
     'SELECT song_name FROM singer WHERE age > (SELECT max(age) FROM singer)'),
    ('concert_singer', 'SELECT song_name FROM singer WHERE age > (SELECT avg(age) FROM singer)',
     'SELECT song_name FROM singer WHERE age > 30'),
    ('concert_singer', 'SELECT name , country , age FROM singer ORDER BY age DESC',
     'SELECT name , country , age FROM singer ORDER BY age DESC LIMIT 5'),
    ('concert_singer', 'SELECT name , country , age FROM singer ORDER BY age DESC',
     'SELECT name , country , age FROM singer ORDER BY age DESC , name'),
    ('concert_singer', 'SELECT name FROM stadium WHERE stadium_id NOT IN (SELECT stadium_id FROM concert)',
     'SELECT name FROM stadium EXCEPT SELECT T2.name FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id'),
    ('concert_singer', 'SELECT count(*) FROM concert WHERE YEAR = 2014 OR YEAR = 2015',
     'SELECT count(*) FROM concert WHERE YEAR = 2015 OR YEAR = 2014'),
    ('concert_singer', 'SELECT count(*) FROM concert WHERE YEAR = 2014 OR YEAR = 2015',
     'SELECT count(*) FROM concert WHERE YEAR IN (2014 , 2015)'),
    ('concert_singer', 'SELECT LOCATION , name FROM stadium WHERE capacity BETWEEN 5000 AND 10000',
     'SELECT LOCATION , name FROM stadium WHERE capacity >= 5000 AND capacity <= 10000'),
    ('concert_singer', 'SELECT LOCATION , name FROM stadium WHERE capacity BETWEEN 5000 AND 10000',
     'SELECT LOCATION , name FROM stadium WHERE capacity BETWEEN 1 AND 2'),
    ('concert_singer', 'SELECT name , country FROM singer WHERE song_name LIKE \'%Hey%\'',
     'SELECT name , country FROM singer WHERE song_name = \'Hey\''),
    ('concert_singer', 'SELECT count(DISTINCT country) FROM singer', 'SELECT count(country) FROM singer'),
    ('concert_singer', 'SELECT count(*) FROM singer', 'SELECT count(*) FROM singer;'),
    ('concert_singer', 'SELECT count(*) FROM singer', 'SELECT count(*) FROM (SELECT * FROM singer)'),
    ('car_1', 'SELECT count(*) FROM (SELECT T1.CountryId FROM COUNTRIES AS T1 JOIN CAR_MAKERS AS T2 ON T1.CountryId = T2.Country GROUP BY T1.CountryId HAVING count(*) > 2)',
     'SELECT count(*) FROM (SELECT T1.CountryId FROM COUNTRIES AS T1 JOIN CAR_MAKERS AS T2 ON T1.CountryId = T2.Country GROUP BY T1.CountryId HAVING count(*) > 3)'),
    ('car_1', 'SELECT count(*) FROM (SELECT T1.CountryId FROM COUNTRIES AS T1 JOIN CAR_MAKERS AS T2 ON T1.CountryId = T2.Country GROUP BY T1.CountryId HAVING count(*) > 2)',
     'SELECT count(*) FROM (SELECT T2.Country FROM COUNTRIES AS T1 JOIN CAR_MAKERS AS T2 ON T1.CountryId = T2.Country GROUP BY T1.CountryId HAVING count(*) > 2)'),
    ('car_1', 'SELECT T1.Model FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId = T2.Id ORDER BY T2.horsepower ASC LIMIT 1',
     'SELECT T1.Model FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId = T2.Id ORDER BY T2.horsepower LIMIT 1'),
    ('car_1', 'SELECT T1.Model FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId = T2.Id ORDER BY T2.horsepower ASC LIMIT 1',
     'SELECT T1.Model FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId = T2.Id ORDER BY T2.weight ASC LIMIT 1'),
    ('car_1', 'SELECT T1.Model FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId = T2.Id ORDER BY T2.horsepower ASC LIMIT 1',
     'SELECT T1.Model FROM CAR_NAMES AS T1 JOIN CARS_DATA AS T2 ON T1.MakeId = T2.Id ORDER BY T2.horsepower + T2.weight ASC LIMIT 1'),
    ('car_1', 'SELECT Maker , Model FROM MODEL_LIST', 'SELECT Maker , Model FROM MODEL_LIST AS T1 JOIN CAR_MAKERS AS T2 ON T1.Maker = T2.Id'),
    ('world_1', 'SELECT Name FROM country WHERE IndepYear > 1950', 'SELECT Name FROM country WHERE IndepYear > 1950 OR IndepYear < 1900'),
    ('world_1', 'SELECT sum(SurfaceArea) FROM country WHERE Region = \'Caribbean\'', 'SELECT sum(SurfaceArea) FROM country WHERE Region LIKE \'Carib%\''),
    ('world_1', 'SELECT Code FROM country WHERE GovernmentForm != \'Republic\' EXCEPT SELECT CountryCode FROM countrylanguage WHERE LANGUAGE = \'English\'',
     'SELECT Code FROM country WHERE GovernmentForm != \'Republic\' EXCEPT SELECT Code FROM country WHERE Name = \'English\''),
    ('world_1', 'SELECT T1.Name FROM country AS T1 JOIN countrylanguage AS T2 ON T1.Code = T2.CountryCode GROUP BY T1.Name ORDER BY COUNT(*) DESC LIMIT 1',
     'SELECT T1.Name FROM country AS T1 JOIN countrylanguage AS T2 ON T1.Code = T2.CountryCode GROUP BY T2.CountryCode ORDER BY COUNT(*) DESC LIMIT 1'),
    ('world_1', 'SELECT T1.Name FROM country AS T1 JOIN countrylanguage AS T2 ON T1.Code = T2.CountryCode GROUP BY T1.Name ORDER BY COUNT(*) DESC LIMIT 1',
     'SELECT T1.Name FROM country AS T1 JOIN city AS T2 ON T1.Code = T2.CountryCode GROUP BY T1.Name ORDER BY COUNT(*) DESC LIMIT 1'),
    ('world_1', 'SELECT count(*) FROM country WHERE continent = \'Asia\'', 'SELECT count(*) FROM country WHERE NOT continent = \'Asia\''),
    ('flight_2', 'SELECT count(*) FROM FLIGHTS AS T1 JOIN AIRPORTS AS T2 ON T1.SourceAirport = T2.AirportCode WHERE T2.City = \'Aberdeen\'',
     'SELECT count(*) FROM FLIGHTS AS T1 JOIN AIRPORTS AS T2 ON T1.DestAirport = T2.AirportCode WHERE T2.City = \'Aberdeen\''),
    ('flight_2', 'SELECT count(*) FROM FLIGHTS AS T1 JOIN AIRPORTS AS T2 ON T1.SourceAirport = T2.AirportCode WHERE T2.City = \'Aberdeen\'',
     'SELECT count(*) FROM FLIGHTS AS T1 JOIN AIRPORTS AS T2 ON T1.SourceAirport = T2.AirportCode OR T1.DestAirport = T2.AirportCode WHERE T2.City = \'Aberdeen\''),
    ('flight_2', 'SELECT AirportName FROM Airports WHERE AirportCode NOT IN (SELECT SourceAirport FROM Flights UNION SELECT DestAirport FROM Flights)',
     'SELECT AirportName FROM Airports WHERE AirportCode NOT IN (SELECT SourceAirport FROM Flights)'),
    ('dog_kennels', 'SELECT first_name FROM Professionals UNION SELECT first_name FROM Owners EXCEPT SELECT name FROM Dogs',
     'SELECT first_name FROM Professionals UNION SELECT first_name FROM Owners'),
    ('dog_kennels', 'SELECT avg(age) FROM Dogs WHERE dog_id IN (SELECT dog_id FROM Treatments)',
     'SELECT avg(T1.age) FROM Dogs AS T1 JOIN Treatments AS T2 ON T1.dog_id = T2.dog_id'),
    ('dog_kennels', 'SELECT name , age , weight FROM Dogs WHERE abandoned_yn = 1', 'SELECT name , age , weight FROM Dogs WHERE abandoned_yn = \'1\''),
    ('sakila_1', 'SELECT title FROM film WHERE length > 100 AND rating = \'G\'', 'SELECT title FROM film WHERE rating = \'G\' AND length > 100'),
    ('sakila_1', 'SELECT title FROM film WHERE length > 100 AND rating = \'G\'', 'SELECT title FROM film WHERE length > 100 AND rating = \'G\' AND rental_rate > 1'),
    ('sakila_1', 'SELECT customer_id , sum(amount) FROM payment GROUP BY customer_id', 'SELECT customer_id , sum(amount) FROM payment GROUP BY customer_id , amount'),
    ('sakila_1', 'SELECT customer_id , sum(amount) FROM payment GROUP BY customer_id', 'SELECT customer_id , sum(amount) FROM payment'),
    ('pets_1', 'SELECT count(*) FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid WHERE T1.age > 20',
     'SELECT count(*) FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid WHERE T1.age = T1.stuid OR T1.age > 20'),
    ('pets_1', 'SELECT count(*) FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid WHERE T1.age > 20',
     'SELECT count(*) FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid WHERE T1.age > T1.stuid OR T1.sex = \'F\' AND T1.age > 20'),
    ('pets_1', 'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T1.stuid HAVING count(*) > 1',
     'SELECT T1.fname , T1.sex FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid GROUP BY T1.stuid HAVING count(*) > count(T2.petid)'),
    ('pets_1', 'SELECT avg(weight) , pettype FROM pets GROUP BY pettype',
     'SELECT avg(weight) , pettype FROM pets WHERE weight > pet_age + 1 GROUP BY pettype'),
    ('pets_1', 'SELECT count(*) FROM pets WHERE weight > 10', 'SELECT count(*) FROM pets WHERE weight > -10'),
    ('pets_1', 'SELECT count(*) FROM pets WHERE weight > 10', 'SELECT count(*) FROM pets WHERE weight > 10.0'),
    ('pets_1', 'SELECT count(*) FROM pets WHERE weight > 10', 'SELECT count(*) FROM pets WHERE pets.weight > 10'),
    ('pets_1', 'SELECT count(*) FROM pets WHERE weight > 10', 'SELECT count(*) FROM pets AS pets WHERE weight > 10'),
    ('pets_1', 'SELECT count(*) FROM pets WHERE weight > 10', 'SELECT count(*) FROM pets WHERE weight IS NULL'),
    ('pets_1', 'SELECT count(*) FROM pets WHERE weight > 10', 'SELECT count(*) FROM pets, student WHERE weight > 10'),
    ('pets_1', 'SELECT max(weight) , petType FROM pets GROUP BY petType', 'SELECT max(weight) , petType FROM pets GROUP BY pettype ORDER BY max(weight)'),
    ('orchestra', 'SELECT max(SHARE) , min(SHARE) FROM performance WHERE TYPE != \'Live final\'',
     'SELECT max(SHARE) , min(SHARE) FROM performance WHERE TYPE NOT LIKE \'Live final\''),
]


def em_corpus(tables, dev):
    rng = random.Random(20240611)
    rows = []
    for db, gold, pred in HANDWRITTEN:
        rows.append({'db_id': db, 'kind': 'handwritten', 'gold': gold, 'pred': pred,
                     'em': spider_eval.exact_match(tables[db], gold, pred)})
    for ex in dev:
        entry = tables[ex['db_id']]
        for kind, pred in mutations(ex['query'], entry, rng):
            rows.append({'db_id': ex['db_id'], 'kind': kind, 'gold': ex['query'], 'pred': pred,
                         'em': spider_eval.exact_match(entry, ex['query'], pred)})
    return rows


def dump(rows):
    return ''.join(json.dumps(r, ensure_ascii=False) + '\n' for r in rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument('--check', action='store_true')
    args = ap.parse_args()
    tables, dev = load()
    outputs = {
        'serialization_goldens.jsonl': dump(serialization_goldens(tables, dev)),
        'em_corpus.jsonl': dump(em_corpus(tables, dev)),
    }
    stale = []
    for name, text in outputs.items():
        path = OUT / name
        if args.check:
            if not path.exists() or path.read_text() != text:
                stale.append(name)
        else:
            OUT.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            print(f'{name}: {text.count(chr(10))} rows')
    if stale:
        print('stale oracle fixtures: ' + ', '.join(stale))
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
